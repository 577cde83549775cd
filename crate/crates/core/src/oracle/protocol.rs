//! Wire format of the external-oracle protocol: one JSON object per line.
//!
//! ```text
//! → {"cmd":"hello"}
//! ← {"cmd":"hello","features":m,"classes":K}
//! → {"cmd":"check","id":n,"epsilon":e,"norm":"l1","fixed":[1,3],"instance":[..],"label":c}
//! ← {"cmd":"answer","id":n,"found":true,"witness":[..]}
//! → {"cmd":"cancel","id":n}
//! ← {"cmd":"answer","id":n,"found":null}
//! → {"cmd":"quit"}
//! ```
//!
//! A backend may also reply `{"cmd":"error","id":n,"message":".."}` when a
//! query cannot be decided. Unknown fields are ignored.

use serde::{Deserialize, Serialize};

use crate::norm::Norm;

/// Engine → backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "lowercase")]
pub enum Request {
    Hello,
    Check {
        id: u64,
        epsilon: f64,
        norm: Norm,
        /// 1-based.
        fixed: Vec<usize>,
        instance: Vec<f64>,
        label: usize,
    },
    Cancel {
        id: u64,
    },
    Quit,
}

/// Backend → engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "lowercase")]
pub enum Response {
    Hello {
        features: usize,
        classes: usize,
    },
    Answer {
        id: u64,
        /// `None` reports a cancelled query.
        found: Option<bool>,
        #[serde(default)]
        witness: Option<Vec<f64>>,
    },
    Error {
        #[serde(default)]
        id: Option<u64>,
        message: String,
    },
}

pub fn encode<T: Serialize>(message: &T) -> String {
    let mut line = serde_json::to_string(message).expect("protocol messages always serialize");
    line.push('\n');
    line
}

pub fn decode<'a, T: Deserialize<'a>>(line: &'a str) -> Result<T, String> {
    serde_json::from_str(line.trim_end()).map_err(|e| format!("malformed message {:?}: {e}", line.trim_end()))
}
