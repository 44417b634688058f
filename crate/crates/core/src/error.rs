use alloc::string::String;

/// Errors raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// A caller passed a value outside an operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// An operation was invoked on state that does not satisfy its precondition.
    #[error("illegal state: {0}")]
    IllegalState(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidArgument(alloc::format!($($arg)*))
    };
}

macro_rules! illegal {
    ($($arg:tt)*) => {
        $crate::error::Error::IllegalState(alloc::format!($($arg)*))
    };
}

pub(crate) use illegal;
pub(crate) use invalid;
