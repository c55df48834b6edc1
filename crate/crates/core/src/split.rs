//! The generalization splits: which programs belong to the train and test
//! distributions of each task, for both DSLs.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::deepcoder::{DcCall, DcProgram, Lambda, Operation};
use crate::robustfill::{ComposeInner, RfExpression, RfProgram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DomainKind {
    #[serde(rename = "rf")]
    RobustFill,
    #[serde(rename = "dc")]
    DeepCoder,
}

impl DomainKind {
    pub const ALL: [DomainKind; 2] = [DomainKind::RobustFill, DomainKind::DeepCoder];

    pub fn as_str(self) -> &'static str {
        match self {
            DomainKind::RobustFill => "rf",
            DomainKind::DeepCoder => "dc",
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DomainKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rf" | "robustfill" => Ok(DomainKind::RobustFill),
            "dc" | "deepcoder" => Ok(DomainKind::DeepCoder),
            _ => Err(format!("unknown domain {s:?} (expected rf or dc)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SplitKind {
    #[serde(rename = "NONE")]
    NoGeneralization,
    #[serde(rename = "LENGTH")]
    Length,
    #[serde(rename = "CONCEPT_MIX")]
    ComposeDifferentConcepts,
    #[serde(rename = "CONCEPT_ORDER")]
    SwitchConceptOrder,
    #[serde(rename = "NEW_OP")]
    ComposeNewOperation,
    #[serde(rename = "OP_FUNCTIONALITY")]
    AddOperationFunctionality,
}

impl SplitKind {
    pub const ALL: [SplitKind; 6] = [
        SplitKind::NoGeneralization,
        SplitKind::Length,
        SplitKind::ComposeDifferentConcepts,
        SplitKind::SwitchConceptOrder,
        SplitKind::ComposeNewOperation,
        SplitKind::AddOperationFunctionality,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitKind::NoGeneralization => "NONE",
            SplitKind::Length => "LENGTH",
            SplitKind::ComposeDifferentConcepts => "CONCEPT_MIX",
            SplitKind::SwitchConceptOrder => "CONCEPT_ORDER",
            SplitKind::ComposeNewOperation => "NEW_OP",
            SplitKind::AddOperationFunctionality => "OP_FUNCTIONALITY",
        }
    }
}

impl fmt::Display for SplitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SplitKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown split {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Train,
    Test,
}

impl Side {
    pub const ALL: [Side; 2] = [Side::Train, Side::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Train => "train",
            Side::Test => "test",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Side::Train),
            "test" => Ok(Side::Test),
            _ => Err(format!("unknown side {s:?} (expected train or test)")),
        }
    }
}

/// Operation groups used by the concept-based splits.
///
/// RobustFill: substring operations vs. modifications plus constants.
/// DeepCoder: first-order operations plus `Map` vs. the other higher-order ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Concept {
    Substring,
    NonSubstring,
    FirstOrder,
    HigherOrder,
}

/// What the split predicates need to know about one subprogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PartFacts {
    /// `None` for RobustFill's `Compose`, which belongs to neither concept.
    pub concept: Option<Concept>,
    /// Uses the operation held out by the new-operation split.
    pub special: bool,
    /// Uses the functionality held out by the operation-functionality split.
    pub extends: bool,
}

pub fn rf_concept(expr: &RfExpression) -> Option<Concept> {
    match expr {
        RfExpression::Substring(_) => Some(Concept::Substring),
        RfExpression::Modification(_) | RfExpression::ConstStr(_) => Some(Concept::NonSubstring),
        RfExpression::Compose(..) => None,
    }
}

pub fn dc_concept(op: Operation) -> Concept {
    if op.is_higher_order() && op != Operation::Map {
        Concept::HigherOrder
    } else {
        Concept::FirstOrder
    }
}

pub fn rf_part(expr: &RfExpression) -> PartFacts {
    PartFacts {
        concept: rf_concept(expr),
        special: matches!(expr, RfExpression::Compose(..)),
        extends: matches!(expr, RfExpression::Compose(_, ComposeInner::Substring(_))),
    }
}

pub fn dc_part(call: &DcCall) -> PartFacts {
    PartFacts {
        concept: Some(dc_concept(call.op)),
        special: call.op == Operation::Scanl1,
        extends: call.op == Operation::Scanl1
            && matches!(
                call.lambda,
                Some(Lambda::Add | Lambda::Multiply | Lambda::Max)
            ),
    }
}

/// Programs whose subprograms can be described by [`PartFacts`].
pub trait SplitProgram {
    fn parts(&self) -> Vec<PartFacts>;
}

impl SplitProgram for RfProgram {
    fn parts(&self) -> Vec<PartFacts> {
        self.expressions.iter().map(rf_part).collect()
    }
}

impl SplitProgram for DcProgram {
    fn parts(&self) -> Vec<PartFacts> {
        self.statements.iter().map(|s| dc_part(&s.call)).collect()
    }
}

/// One generalization task instantiated for one domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Split {
    pub domain: DomainKind,
    pub kind: SplitKind,
}

impl Split {
    pub fn new(domain: DomainKind, kind: SplitKind) -> Self {
        Split { domain, kind }
    }

    fn base_max(self) -> usize {
        match self.domain {
            DomainKind::RobustFill => 6,
            DomainKind::DeepCoder => 4,
        }
    }

    /// Program lengths allowed on a side.
    pub fn lengths(self, side: Side) -> RangeInclusive<usize> {
        let max = self.base_max();
        match (self.kind, side, self.domain) {
            (SplitKind::Length, Side::Test, DomainKind::RobustFill) => 7..=10,
            (SplitKind::Length, Side::Test, DomainKind::DeepCoder) => 5..=5,
            (
                SplitKind::ComposeDifferentConcepts | SplitKind::SwitchConceptOrder,
                _,
                DomainKind::RobustFill,
            ) => 2..=max,
            (SplitKind::ComposeNewOperation, Side::Test, _) => 2..=max,
            _ => 1..=max,
        }
    }

    /// Longest program on either side.
    pub fn max_length(self) -> usize {
        *self
            .lengths(Side::Train)
            .end()
            .max(self.lengths(Side::Test).end())
    }

    /// The concept that comes first in training programs of the order split.
    pub fn first_concept(self) -> Concept {
        match self.domain {
            DomainKind::RobustFill => Concept::Substring,
            DomainKind::DeepCoder => Concept::FirstOrder,
        }
    }

    pub fn second_concept(self) -> Concept {
        match self.domain {
            DomainKind::RobustFill => Concept::NonSubstring,
            DomainKind::DeepCoder => Concept::HigherOrder,
        }
    }

    pub fn contains(self, side: Side, parts: &[PartFacts]) -> bool {
        let len = parts.len();
        if !self.lengths(side).contains(&len) {
            return false;
        }
        match self.kind {
            SplitKind::NoGeneralization | SplitKind::Length => true,
            SplitKind::ComposeDifferentConcepts => {
                let Some(concepts) = parts.iter().map(|p| p.concept).collect::<Option<Vec<_>>>()
                else {
                    return false;
                };
                let uniform = concepts.iter().all(|&c| c == concepts[0]);
                match side {
                    Side::Train => uniform,
                    Side::Test => !uniform,
                }
            }
            SplitKind::SwitchConceptOrder => {
                let (a, b) = match side {
                    Side::Train => (self.first_concept(), self.second_concept()),
                    Side::Test => (self.second_concept(), self.first_concept()),
                };
                let head = len.div_ceil(2);
                parts
                    .iter()
                    .enumerate()
                    .all(|(i, p)| p.concept == Some(if i < head { a } else { b }))
            }
            SplitKind::ComposeNewOperation => {
                let uses = parts.iter().any(|p| p.special);
                match side {
                    Side::Train if len == 1 => uses,
                    Side::Train => !uses,
                    Side::Test => uses,
                }
            }
            SplitKind::AddOperationFunctionality => {
                let uses = parts.iter().any(|p| p.extends);
                match side {
                    Side::Train => !uses,
                    Side::Test => uses,
                }
            }
        }
    }

    pub fn in_train(self, program: &impl SplitProgram) -> bool {
        self.contains(Side::Train, &program.parts())
    }

    pub fn in_test(self, program: &impl SplitProgram) -> bool {
        self.contains(Side::Test, &program.parts())
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.domain, self.kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(text: &str) -> RfProgram {
        text.parse().unwrap()
    }

    fn dc(text: &str) -> DcProgram {
        text.parse().unwrap()
    }

    #[test]
    fn rf_length_seven_is_test_only() {
        let split = Split::new(DomainKind::RobustFill, SplitKind::Length);
        let p = rf(&vec!["Const('a')"; 7].join(" | "));
        assert!(split.in_test(&p));
        assert!(!split.in_train(&p));
    }

    #[test]
    fn dc_new_op_single_scanl1_is_train() {
        let split = Split::new(DomainKind::DeepCoder, SplitKind::ComposeNewOperation);
        let p = dc("x0 = INPUT | x1 = Scanl1 (min) x0");
        assert!(split.in_train(&p));
        assert!(!split.in_test(&p));
    }

    #[test]
    fn empty_program_is_nowhere() {
        for kind in SplitKind::ALL {
            for domain in DomainKind::ALL {
                let split = Split::new(domain, kind);
                assert!(!split.contains(Side::Train, &[]));
                assert!(!split.contains(Side::Test, &[]));
            }
        }
    }

    #[test]
    fn concepts() {
        assert_eq!(
            rf_concept(&"GetToken(WORD, 1)".parse().unwrap()),
            Some(Concept::Substring)
        );
        assert_eq!(
            rf_concept(&"Const('.')".parse().unwrap()),
            Some(Concept::NonSubstring)
        );
        assert_eq!(
            rf_concept(
                &"Compose(ToCase(PROPER), GetToken(WORD, 1))"
                    .parse()
                    .unwrap()
            ),
            None
        );
        assert_eq!(dc_concept(Operation::Map), Concept::FirstOrder);
        assert_eq!(dc_concept(Operation::Take), Concept::FirstOrder);
        for op in [
            Operation::Filter,
            Operation::Count,
            Operation::ZipWith,
            Operation::Scanl1,
        ] {
            assert_eq!(dc_concept(op), Concept::HigherOrder);
        }
    }

    #[test]
    fn concept_order_odd_length() {
        let split = Split::new(DomainKind::RobustFill, SplitKind::SwitchConceptOrder);
        // substring, substring, constant: ceil(3/2) = 2 leading substring parts
        assert!(split.in_train(&rf("GetUpto(' ') | GetFrom(' ') | Const('.')")));
        assert!(!split.in_train(&rf("GetUpto(' ') | Const('.') | Const('.')")));
        assert!(split.in_test(&rf("Const('.') | Trim() | GetFrom(' ')")));
    }

    #[test]
    fn op_functionality() {
        let split = Split::new(DomainKind::RobustFill, SplitKind::AddOperationFunctionality);
        assert!(split.in_test(&rf("Compose(ToCase(LOWER), GetToken(WORD, 1))")));
        assert!(split.in_train(&rf("Compose(ToCase(LOWER), Trim())")));
        let split = Split::new(DomainKind::DeepCoder, SplitKind::AddOperationFunctionality);
        assert!(split.in_train(&dc("x0 = INPUT | x1 = Scanl1 (-) x0")));
        assert!(split.in_test(&dc("x0 = INPUT | x1 = Scanl1 (max) x0")));
    }

    #[test]
    fn identifiers_round_trip() {
        for kind in SplitKind::ALL {
            assert_eq!(kind.as_str().parse::<SplitKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.as_str()));
        }
    }
}
