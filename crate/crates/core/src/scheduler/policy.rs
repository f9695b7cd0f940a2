use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Direction in which a classified thread moves its chunk divisor.
///
/// `FastGrows`: a `Low` thread doubles `d` (smaller chunks), a `High` thread
/// halves it (larger chunks). `FastShrinks` is the mirror image: the thread
/// that is ahead of the pack halves its chunk so more of its queue stays
/// stealable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Polarity {
    #[default]
    FastGrows,
    FastShrinks,
}

impl Polarity {
    /// Short name used on the command line and in reports.
    pub fn cli_name(self) -> &'static str {
        match self {
            Polarity::FastGrows => "paper",
            Polarity::FastShrinks => "figure",
        }
    }
}

impl FromStr for Polarity {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" | "fast-grows" => Ok(Polarity::FastGrows),
            "figure" | "fast-shrinks" => Ok(Polarity::FastShrinks),
            other => Err(PolicyError::UnknownPolarity(other.to_string())),
        }
    }
}

/// Scheduler selection for one `parallel_for` invocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    Static,
    Dynamic { chunk: usize },
    Guided { min_chunk: usize },
    Stealing { chunk: usize },
    Ich { epsilon: f64, polarity: Polarity },
}

/// Policy family without its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    Static,
    Dynamic,
    Guided,
    Stealing,
    Ich,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("chunk size must be at least 1 (got {0})")]
    ZeroChunk(usize),
    #[error("epsilon must lie strictly between 0 and 1 (got {0})")]
    EpsilonOutOfRange(f64),
    #[error("thread count must be at least 1")]
    NoThreads,
    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),
    #[error("unknown polarity `{0}`")]
    UnknownPolarity(String),
}

impl Policy {
    pub fn dynamic(chunk: usize) -> Result<Self, PolicyError> {
        Policy::Dynamic { chunk }.validated()
    }

    pub fn guided(min_chunk: usize) -> Result<Self, PolicyError> {
        Policy::Guided { min_chunk }.validated()
    }

    pub fn stealing(chunk: usize) -> Result<Self, PolicyError> {
        Policy::Stealing { chunk }.validated()
    }

    pub fn ich(epsilon: f64, polarity: Polarity) -> Result<Self, PolicyError> {
        Policy::Ich { epsilon, polarity }.validated()
    }

    pub fn validated(self) -> Result<Self, PolicyError> {
        match self {
            Policy::Static => {}
            Policy::Dynamic { chunk } | Policy::Stealing { chunk } => {
                if chunk == 0 {
                    return Err(PolicyError::ZeroChunk(chunk));
                }
            }
            Policy::Guided { min_chunk } => {
                if min_chunk == 0 {
                    return Err(PolicyError::ZeroChunk(min_chunk));
                }
            }
            Policy::Ich { epsilon, .. } => {
                if !(epsilon > 0.0 && epsilon < 1.0) {
                    return Err(PolicyError::EpsilonOutOfRange(epsilon));
                }
            }
        }
        Ok(self)
    }

    pub fn kind(&self) -> PolicyKind {
        match self {
            Policy::Static => PolicyKind::Static,
            Policy::Dynamic { .. } => PolicyKind::Dynamic,
            Policy::Guided { .. } => PolicyKind::Guided,
            Policy::Stealing { .. } => PolicyKind::Stealing,
            Policy::Ich { .. } => PolicyKind::Ich,
        }
    }

    /// Whether the policy runs on per-worker queues with stealing.
    pub fn uses_local_queues(&self) -> bool {
        matches!(self, Policy::Stealing { .. } | Policy::Ich { .. })
    }

    /// Parameter rendered as a short string: the chunk for chunked
    /// policies, epsilon (plus a `:figure` suffix for the alternate
    /// polarity) for `Ich`, empty for `Static`.
    pub fn param_string(&self) -> String {
        match *self {
            Policy::Static => String::new(),
            Policy::Dynamic { chunk } | Policy::Stealing { chunk } => chunk.to_string(),
            Policy::Guided { min_chunk } => min_chunk.to_string(),
            Policy::Ich { epsilon, polarity } => match polarity {
                Polarity::FastGrows => format!("{epsilon}"),
                Polarity::FastShrinks => format!("{epsilon}:{}", polarity.cli_name()),
            },
        }
    }

    /// Inverse of `kind().name()` + `param_string()`.
    pub fn parse(kind: PolicyKind, param: &str) -> Result<Self, PolicyError> {
        let chunk = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| PolicyError::UnknownPolicy(format!("{}:{s}", kind.name())))
        };
        match kind {
            PolicyKind::Static => Ok(Policy::Static),
            PolicyKind::Dynamic => Policy::dynamic(chunk(param)?),
            PolicyKind::Guided => Policy::guided(chunk(param)?),
            PolicyKind::Stealing => Policy::stealing(chunk(param)?),
            PolicyKind::Ich => {
                let (eps, polarity) = match param.split_once(':') {
                    Some((e, p)) => (e, p.parse()?),
                    None => (param, Polarity::default()),
                };
                let epsilon = eps
                    .parse::<f64>()
                    .map_err(|_| PolicyError::UnknownPolicy(format!("ich:{param}")))?;
                Policy::ich(epsilon, polarity)
            }
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let param = self.param_string();
        if param.is_empty() {
            f.write_str(self.kind().name())
        } else {
            write!(f, "{}({param})", self.kind().name())
        }
    }
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Static,
        PolicyKind::Dynamic,
        PolicyKind::Guided,
        PolicyKind::Stealing,
        PolicyKind::Ich,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Static => "static",
            PolicyKind::Dynamic => "dynamic",
            PolicyKind::Guided => "guided",
            PolicyKind::Stealing => "stealing",
            PolicyKind::Ich => "ich",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| PolicyError::UnknownPolicy(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_reject_invalid_parameters() {
        assert_eq!(Policy::dynamic(0), Err(PolicyError::ZeroChunk(0)));
        assert_eq!(Policy::guided(0), Err(PolicyError::ZeroChunk(0)));
        assert_eq!(Policy::stealing(0), Err(PolicyError::ZeroChunk(0)));
        assert!(Policy::ich(0.0, Polarity::FastGrows).is_err());
        assert!(Policy::ich(1.0, Polarity::FastGrows).is_err());
        assert!(Policy::ich(f64::NAN, Polarity::FastGrows).is_err());
        assert!(Policy::ich(0.33, Polarity::FastShrinks).is_ok());
    }

    #[test]
    fn param_string_round_trips() {
        let policies = [
            Policy::Static,
            Policy::Dynamic { chunk: 3 },
            Policy::Guided { min_chunk: 2 },
            Policy::Stealing { chunk: 64 },
            Policy::Ich { epsilon: 0.33, polarity: Polarity::FastGrows },
            Policy::Ich { epsilon: 0.5, polarity: Polarity::FastShrinks },
        ];
        for p in policies {
            let back = Policy::parse(p.kind(), &p.param_string()).unwrap();
            assert_eq!(back, p);
        }
        assert_eq!(Policy::Ich { epsilon: 0.5, polarity: Polarity::FastShrinks }.param_string(), "0.5:figure");
    }

    #[test]
    fn kind_names_parse() {
        for k in PolicyKind::ALL {
            assert_eq!(k.name().parse::<PolicyKind>().unwrap(), k);
        }
        assert!("taskloop".parse::<PolicyKind>().is_err());
    }
}
