use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A value violates a documented range or shape.
    #[error("invalid input: {0}")]
    Input(String),
    /// A caller passed an object whose mode or shape the operation does not accept.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("mask for view {view_id} is {mask_width}x{mask_height}, view is {view_width}x{view_height}")]
    DimensionMismatch {
        view_id: u32,
        mask_width: u32,
        mask_height: u32,
        view_width: u32,
        view_height: u32,
    },
    #[error("label {label} at pixel ({x}, {y}) of view {view_id} is not below the object count {num_objects}")]
    LabelOutOfRange {
        view_id: u32,
        x: u32,
        y: u32,
        label: u16,
        num_objects: usize,
    },
    #[error("lookup failed: {0}")]
    Lookup(String),
    #[error("refused: {0}")]
    Refused(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// Short stable tag, used by front ends for machine-readable errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Contract(_) => "contract",
            Error::DimensionMismatch { .. } => "dimension",
            Error::LabelOutOfRange { .. } => "label",
            Error::Lookup(_) => "lookup",
            Error::Refused(_) => "refused",
        }
    }
}
