use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// HAMD scores strictly above this are labelled depressed.
pub const HAMD_THRESHOLD: i64 = 7;

/// Binary session class. The discriminant is the class index used by the
/// model output, confusion matrices and vote aggregation: depressed is
/// class 0, not depressed class 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    Depressed = 0,
    NotDepressed = 1,
}

impl Class {
    pub const ALL: [Class; 2] = [Class::Depressed, Class::NotDepressed];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Class> {
        match i {
            0 => Some(Class::Depressed),
            1 => Some(Class::NotDepressed),
            _ => None,
        }
    }

    pub fn other(self) -> Class {
        match self {
            Class::Depressed => Class::NotDepressed,
            Class::NotDepressed => Class::Depressed,
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Class::Depressed => "D",
            Class::NotDepressed => "ND",
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Depressed => "depressed",
            Class::NotDepressed => "not_depressed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionLabel {
    pub session_id: String,
    pub hamd: u32,
    pub class: Class,
}

impl SessionLabel {
    pub fn new(session_id: impl Into<String>, hamd: i64) -> Result<Self> {
        let class = hamd_label(hamd)?;
        Ok(Self { session_id: session_id.into(), hamd: hamd as u32, class })
    }
}

pub fn hamd_label(hamd: i64) -> Result<Class> {
    if hamd < 0 {
        return Err(Error::NegativeScore(hamd));
    }
    Ok(if hamd > HAMD_THRESHOLD { Class::Depressed } else { Class::NotDepressed })
}
