//! Identifiers shared by every module.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Simulation step index.
pub type Step = u64;

/// Exact-match token identifying a worm or a benign anomaly class.
///
/// Tokens are restricted to `[A-Za-z0-9_.-]` so they can be used verbatim in
/// CSV column names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Antigen(String);

impl TryFrom<String> for Antigen {
    type Error = String;

    fn try_from(token: String) -> Result<Self, String> {
        Antigen::new(token.clone())
            .ok_or_else(|| format!("invalid antigen token `{token}`, expected [A-Za-z0-9_.-]+"))
    }
}

impl From<Antigen> for String {
    fn from(a: Antigen) -> String {
        a.0
    }
}

impl Antigen {
    pub fn new(token: impl Into<String>) -> Option<Self> {
        let token = token.into();
        Self::is_valid_token(&token).then_some(Antigen(token))
    }

    pub fn is_valid_token(token: &str) -> bool {
        !token.is_empty()
            && token
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Antigen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct HostId(pub u32);

impl HostId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for HostId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h{}", self.0)
    }
}

/// Effector T-cell type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CellType {
    /// Strong automated responder.
    #[serde(rename = "CTL")]
    Ctl,
    /// CTL controller; never responds at the periphery.
    #[serde(rename = "Th1")]
    Th1,
    /// Weak automated responder.
    #[serde(rename = "Th2")]
    Th2,
}

impl CellType {
    pub const ALL: [CellType; 3] = [CellType::Ctl, CellType::Th1, CellType::Th2];

    pub fn as_str(self) -> &'static str {
        match self {
            CellType::Ctl => "CTL",
            CellType::Th1 => "Th1",
            CellType::Th2 => "Th2",
        }
    }
}

impl fmt::Display for CellType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where an effector was differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Origin {
    Local,
    Peer(HostId),
}
