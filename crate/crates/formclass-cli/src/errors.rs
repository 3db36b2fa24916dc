//! CLI error type carrying the exit-code policy.
//!
//! Exit codes: 0 all checks pass, 1 usage or environment trouble,
//! 2 a checked identity failed (never expected), 3 an oracle seed
//! bound was too small to be trustworthy.

use formclass::adelic::AdelicError;
use formclass::classlevel::ClassLevelError;
use formclass::congruence::CongruenceError;
use formclass::forms::FormsError;
use formclass::grouptable::GroupTableError;
use formclass::induction::InductionError;
use formclass::numtheory::NumTheoryError;
use formclass::orders::OrdersError;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad input: flags, config, group description, discriminant.
    Usage(String),
    /// A computation needs a larger seed bound before its answer can
    /// be trusted.
    Bound(String),
    /// A cross-checked identity failed.
    Violation(String),
    /// Filesystem trouble around the cache or the report directory.
    Io(String),
    /// Unexpected internal failure.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) | CliError::Internal(_) => 1,
            CliError::Violation(_) => 2,
            CliError::Bound(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Bound(_) => "bound",
            CliError::Violation(_) => "violation",
            CliError::Io(_) => "io",
            CliError::Internal(_) => "internal",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Bound(m)
            | CliError::Violation(m)
            | CliError::Io(m)
            | CliError::Internal(m) => m,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<NumTheoryError> for CliError {
    fn from(e: NumTheoryError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<GroupTableError> for CliError {
    fn from(e: GroupTableError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<CongruenceError> for CliError {
    fn from(e: CongruenceError) -> Self {
        use CongruenceError::*;
        match e {
            ZeroModulus | LevelTooLarge(_) | NotADivisor(..) | BadGroupSpec(..)
            | NotAUnit(..) | UnitsNotClosed(_) | ElementsNotClosed(_) | DetNotOne(..)
            | DetNotUnit(..) | BadEscapeModulus(_) => CliError::Usage(e.to_string()),
            NoWitness(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<FormsError> for CliError {
    fn from(e: FormsError) -> Self {
        match e {
            FormsError::InvalidDiscriminant(_) => CliError::Usage(e.to_string()),
            FormsError::Congruence(c) => c.into(),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<OrdersError> for CliError {
    fn from(e: OrdersError) -> Self {
        use OrdersError::*;
        match e {
            NotClosed(_) | BoundTooSmall(_) => CliError::Bound(e.to_string()),
            InvalidDiscriminant(_) | DiscTooLarge(_) => CliError::Usage(e.to_string()),
            Forms(f) => f.into(),
            NumTheory(x) => x.into(),
            GroupTable(g) => g.into(),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<ClassLevelError> for CliError {
    fn from(e: ClassLevelError) -> Self {
        match e {
            ClassLevelError::Forms(f) => f.into(),
            ClassLevelError::Congruence(c) => c.into(),
            ClassLevelError::Orders(o) => o.into(),
            ClassLevelError::NumTheory(x) => x.into(),
            ClassLevelError::GroupTable(g) => g.into(),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<InductionError> for CliError {
    fn from(e: InductionError) -> Self {
        match e {
            InductionError::Forms(f) => f.into(),
            InductionError::Congruence(c) => c.into(),
            InductionError::Orders(o) => o.into(),
            InductionError::ClassLevel(c) => c.into(),
            InductionError::NumTheory(x) => x.into(),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<AdelicError> for CliError {
    fn from(e: AdelicError) -> Self {
        match e {
            AdelicError::Congruence(c) => c.into(),
            AdelicError::ClassLevel(c) => c.into(),
            AdelicError::Induction(i) => i.into(),
            other => CliError::Internal(other.to_string()),
        }
    }
}
