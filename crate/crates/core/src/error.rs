use std::fmt;

use thiserror::Error;

pub type Result<T, E = PibtError> = std::result::Result<T, E>;

/// Treatment arm `w ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arm {
    Control,
    Treated,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Control, Arm::Treated];

    pub fn index(self) -> usize {
        match self {
            Arm::Control => 0,
            Arm::Treated => 1,
        }
    }

    pub fn from_indicator(w: u8) -> Option<Arm> {
        match w {
            0 => Some(Arm::Control),
            1 => Some(Arm::Treated),
            _ => None,
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arm::Control => f.write_str("control (w=0)"),
            Arm::Treated => f.write_str("treated (w=1)"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PibtError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("singular design{}: singular value ratio {ratio:e} is not above tolerance {tolerance:e}", arm_suffix(.arm))]
    SingularDesign {
        arm: Option<Arm>,
        ratio: f64,
        tolerance: f64,
    },
}

fn arm_suffix(arm: &Option<Arm>) -> String {
    match arm {
        Some(a) => format!(" in {a} arm"),
        None => String::new(),
    }
}

impl PibtError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        PibtError::InvalidInput(msg.into())
    }

    /// Attaches an arm to a singular-design error raised without one.
    pub fn with_arm(self, arm: Arm) -> Self {
        match self {
            PibtError::SingularDesign {
                arm: None,
                ratio,
                tolerance,
            } => PibtError::SingularDesign {
                arm: Some(arm),
                ratio,
                tolerance,
            },
            other => other,
        }
    }
}

pub(crate) fn check_probability_open(name: &str, p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(PibtError::invalid(format!("{name} must lie in (0, 1), got {p}")))
    }
}
