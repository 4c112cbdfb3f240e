use std::fmt;

use emrkit_core::StatementClass;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelClass {
    Correct,
    Incorrect,
}

/// Annotation labels, declared in distribution-table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    C,
    CLC,
    AI,
    WS,
    WI,
    IE,
    INE,
    ITE,
    ES,
    ENO,
    WAU,
    WLC,
    MISS,
}

impl Label {
    pub const ALL: [Label; 13] = [
        Label::C,
        Label::CLC,
        Label::AI,
        Label::WS,
        Label::WI,
        Label::IE,
        Label::INE,
        Label::ITE,
        Label::ES,
        Label::ENO,
        Label::WAU,
        Label::WLC,
        Label::MISS,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Label::C => "C",
            Label::CLC => "CLC",
            Label::AI => "AI",
            Label::WS => "WS",
            Label::WI => "WI",
            Label::IE => "IE",
            Label::INE => "INE",
            Label::ITE => "ITE",
            Label::ES => "ES",
            Label::ENO => "ENO",
            Label::WAU => "WAU",
            Label::WLC => "WLC",
            Label::MISS => "MISS",
        }
    }

    pub fn parse(code: &str) -> Option<Label> {
        Label::ALL.into_iter().find(|l| l.code() == code)
    }

    pub fn class(self) -> LabelClass {
        match self {
            Label::C | Label::CLC | Label::AI => LabelClass::Correct,
            _ => LabelClass::Incorrect,
        }
    }

    pub fn is_correct(self) -> bool {
        self.class() == LabelClass::Correct
    }

    /// The kind of statement line the label may be put on.
    pub fn applies_to(self) -> StatementClass {
        match self {
            Label::CLC | Label::WLC => StatementClass::Simple,
            _ => StatementClass::Complex,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Label::CLC => "The statement contains a correct language construct.",
            Label::C => "The statement is correct.",
            Label::AI => "The statement does not do exactly what the MR does but is a valid alternative implementation.",
            Label::WLC => "The statement misuses a language construct.",
            Label::WS => "The statement is wrong; it misses required actions, performs the wrong operation, and the explanation does not reflect what the MR requests.",
            Label::WI => "The statement does not correctly implement what its explanation suggests.",
            Label::IE => "The statement invokes an invented API function even though an adequate one exists.",
            Label::INE => "The statement invokes an invented API function because no adequate one exists.",
            Label::ITE => "The statement invokes an invented API function that takes on too much logic.",
            Label::ES => "The statement invokes an existing, appropriate API function but swaps parameters.",
            Label::ENO => "The statement invokes an existing, appropriate API function but not in an object-oriented manner.",
            Label::WAU => "The statement misuses valid APIs.",
            Label::MISS => "The statement misses an instruction required to implement its explanation.",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let code = String::deserialize(d)?;
        Label::parse(&code).ok_or_else(|| serde::de::Error::custom(format!("unknown label '{code}'")))
    }
}
