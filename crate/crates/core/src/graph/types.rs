use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GraphError;

pub const MIN_YEAR: i32 = 1976;
pub const MAX_YEAR: i32 = 2100;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl PartialEq<str> for $name {
            fn eq(&self, other: &str) -> bool {
                self.0 == other
            }
        }

        impl PartialEq<&str> for $name {
            fn eq(&self, other: &&str) -> bool {
                self.0 == *other
            }
        }
    };
}

string_id!(CaseId);
string_id!(CourtId);
string_id!(OpinionId);
string_id!(PassageId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Case,
    Court,
    Opinion,
    Passage,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::Case => "case",
            NodeKind::Court => "court",
            NodeKind::Opinion => "opinion",
            NodeKind::Passage => "passage",
        })
    }
}

/// Section of an opinion that a passage was extracted for: the four fair
/// use factors plus the facts and the conclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Factor {
    Facts,
    Purpose,
    Nature,
    Amount,
    Market,
    Conclusion,
}

impl Factor {
    pub const ALL: [Factor; 6] = [
        Factor::Facts,
        Factor::Purpose,
        Factor::Nature,
        Factor::Amount,
        Factor::Market,
        Factor::Conclusion,
    ];

    /// The four statutory factors.
    pub const STATUTORY: [Factor; 4] = [
        Factor::Purpose,
        Factor::Nature,
        Factor::Amount,
        Factor::Market,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Factor::Facts => "Facts",
            Factor::Purpose => "Purpose",
            Factor::Nature => "Nature",
            Factor::Amount => "Amount",
            Factor::Market => "Market",
            Factor::Conclusion => "Conclusion",
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Factor {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Factor::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| GraphError::InvalidFactorKind(s.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpinionKind {
    Majority,
    Concurrence,
    Dissent,
    Appellate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseNode {
    pub case_id: CaseId,
    pub name: String,
    pub year: i32,
    pub court_id: CourtId,
    /// Reporter citations under which the case is published, e.g.
    /// `"801 F.3d 1126"`. Used to resolve citations found in opinion text.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub citations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CourtNode {
    pub court_id: CourtId,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub appeals_to: Option<CourtId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpinionNode {
    pub opinion_id: OpinionId,
    pub case_id: CaseId,
    pub opinion_kind: OpinionKind,
    pub full_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorPassage {
    pub passage_id: PassageId,
    pub opinion_id: OpinionId,
    pub factor: Factor,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CitationEdge {
    pub from_case: CaseId,
    pub to_case: CaseId,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AppealEdge {
    pub from_court: CourtId,
    pub to_court: CourtId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Case(CaseNode),
    Court(CourtNode),
    Opinion(OpinionNode),
    Passage(FactorPassage),
}
