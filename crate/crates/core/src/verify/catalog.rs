use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of one executable check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "&'static str", try_from = "String")]
pub enum CheckId {
    AghSandwich,
    Thm1GLogmajL,
    Thm1LWlogmajOmega,
    Thm2P1,
    Thm2Pinf,
    Thm2P2M2,
    Conj1WeakMaj,
    Eq26Kyfan,
    Prop3Limit,
    Prop4Monotone,
    Eq21Limit,
    Eq29Compound,
    Eq34Char,
    Eq38Trace,
    Prop5I,
    Prop5Ii,
    Eq42Chain,
    Eq43Logmaj,
    Eq46Det,
    Eq49PtQt,
    Eq51Special,
    Eq52Chain,
    Eq53Traces,
    Eq54Lambda,
    OmegaLeArith,
}

const NAMES: [(CheckId, &str); 25] = [
    (CheckId::AghSandwich, "agh_sandwich"),
    (CheckId::Thm1GLogmajL, "thm1_g_logmaj_l"),
    (CheckId::Thm1LWlogmajOmega, "thm1_l_wlogmaj_omega"),
    (CheckId::Thm2P1, "thm2_p1"),
    (CheckId::Thm2Pinf, "thm2_pinf"),
    (CheckId::Thm2P2M2, "thm2_p2_m2"),
    (CheckId::Conj1WeakMaj, "conj1_weak_maj"),
    (CheckId::Eq26Kyfan, "eq26_kyfan"),
    (CheckId::Prop3Limit, "prop3_limit"),
    (CheckId::Prop4Monotone, "prop4_monotone"),
    (CheckId::Eq21Limit, "eq21_limit"),
    (CheckId::Eq29Compound, "eq29_compound"),
    (CheckId::Eq34Char, "eq34_char"),
    (CheckId::Eq38Trace, "eq38_trace"),
    (CheckId::Prop5I, "prop5_i"),
    (CheckId::Prop5Ii, "prop5_ii"),
    (CheckId::Eq42Chain, "eq42_chain"),
    (CheckId::Eq43Logmaj, "eq43_logmaj"),
    (CheckId::Eq46Det, "eq46_det"),
    (CheckId::Eq49PtQt, "eq49_pt_qt"),
    (CheckId::Eq51Special, "eq51_special"),
    (CheckId::Eq52Chain, "eq52_chain"),
    (CheckId::Eq53Traces, "eq53_traces"),
    (CheckId::Eq54Lambda, "eq54_lambda"),
    (CheckId::OmegaLeArith, "omega_le_arith"),
];

impl CheckId {
    pub const ALL: [CheckId; 25] = {
        let mut out = [CheckId::AghSandwich; 25];
        let mut i = 0;
        while i < 25 {
            out[i] = NAMES[i].0;
            i += 1;
        }
        out
    };

    pub fn name(self) -> &'static str {
        NAMES.iter().find(|(id, _)| *id == self).map(|(_, n)| *n).expect("every id is named")
    }

    /// Accepts the snake-case name, with dashes allowed in place of underscores.
    pub fn parse(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_");
        NAMES.iter().find(|(_, n)| *n == key).map(|(id, _)| *id).ok_or_else(|| Error::Unknown { kind: "check", name: s.to_string() })
    }

    /// Checks whose every sub-inequality is an open conjecture.
    pub fn exploratory(self) -> bool {
        matches!(self, CheckId::Conj1WeakMaj)
    }

    /// Checks that only look at the first two matrices of an instance.
    pub fn pairwise(self) -> bool {
        use CheckId::*;
        matches!(
            self,
            Thm2P2M2 | Eq26Kyfan | Eq38Trace | Prop5I | Prop5Ii | Eq42Chain | Eq43Logmaj | Eq46Det | Eq51Special | Eq52Chain | Eq53Traces
        )
    }
}

impl std::fmt::Display for CheckId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl From<CheckId> for &'static str {
    fn from(id: CheckId) -> &'static str {
        id.name()
    }
}

impl TryFrom<String> for CheckId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        CheckId::parse(&s)
    }
}

/// A named list of checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suite {
    pub name: String,
    pub checks: Vec<CheckId>,
}

pub const SUITE_NAMES: [&str; 6] = ["theorem1", "theorem2", "proposition5", "limits", "remarks", "all"];

impl Suite {
    /// A predefined suite name, or a comma-separated list of check ids.
    pub fn parse(s: &str) -> Result<Suite> {
        use CheckId::*;
        let checks = match s.trim() {
            "theorem1" => vec![AghSandwich, Thm1GLogmajL, Thm1LWlogmajOmega, Eq29Compound, Eq34Char],
            "theorem2" => vec![Thm2P1, Thm2Pinf, Thm2P2M2, Conj1WeakMaj, Eq26Kyfan, OmegaLeArith],
            "proposition5" => vec![Eq38Trace, Prop5I, Prop5Ii, Eq42Chain, Eq43Logmaj],
            "limits" => vec![Prop3Limit, Prop4Monotone, Eq21Limit],
            "remarks" => vec![Eq46Det, Eq49PtQt, Eq51Special, Eq52Chain, Eq53Traces, Eq54Lambda],
            "all" => CheckId::ALL.to_vec(),
            list => {
                let ids = list
                    .split(',')
                    .filter(|x| !x.trim().is_empty())
                    .map(CheckId::parse)
                    .collect::<Result<Vec<_>>>()
                    .map_err(|_| Error::Unknown { kind: "suite", name: s.to_string() })?;
                if ids.is_empty() {
                    return Err(Error::Unknown { kind: "suite", name: s.to_string() });
                }
                ids
            }
        };
        Ok(Suite { name: s.trim().to_string(), checks })
    }
}
