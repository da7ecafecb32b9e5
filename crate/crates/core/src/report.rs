use serde::{Deserialize, Serialize};

/// How the two sides of a checked inequality are compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtLeast,
    AtMost,
    Exceeds,
}

impl Relation {
    /// Signed slack; the relation holds when this is nonnegative
    /// (strictly positive for `Exceeds`).
    pub fn margin(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Relation::AtLeast | Relation::Exceeds => lhs - rhs,
            Relation::AtMost => rhs - lhs,
        }
    }

    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Relation::AtLeast => lhs >= rhs,
            Relation::AtMost => lhs <= rhs,
            Relation::Exceeds => lhs > rhs,
        }
    }
}

/// One evaluated inequality: whether its hypotheses held, both sides, and
/// whether the conclusion held (vacuously true when hypotheses fail).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub hypotheses_hold: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub margin: f64,
    pub pass: bool,
    /// Hypotheses that failed, in the order they were checked.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unmet: Vec<String>,
}

impl LemmaReport {
    pub fn new(lemma: &str, hypotheses_hold: bool, lhs: f64, rhs: f64) -> Self {
        Self::compare(lemma, hypotheses_hold, lhs, Relation::AtLeast, rhs)
    }

    pub fn compare(
        lemma: &str,
        hypotheses_hold: bool,
        lhs: f64,
        relation: Relation,
        rhs: f64,
    ) -> Self {
        LemmaReport {
            lemma: lemma.to_string(),
            hypotheses_hold,
            lhs,
            rhs,
            relation,
            margin: relation.margin(lhs, rhs),
            pass: !hypotheses_hold || relation.holds(lhs, rhs),
            unmet: Vec::new(),
        }
    }

    /// Builds a report from a hypothesis checklist; the report's hypotheses
    /// hold iff `unmet` is empty.
    pub fn with_unmet(
        lemma: &str,
        unmet: Vec<String>,
        lhs: f64,
        relation: Relation,
        rhs: f64,
    ) -> Self {
        let mut r = Self::compare(lemma, unmet.is_empty(), lhs, relation, rhs);
        r.unmet = unmet;
        r
    }

    /// A violation is a failed conclusion under satisfied hypotheses.
    pub fn violated(&self) -> bool {
        self.hypotheses_hold && !self.pass
    }
}

/// Collects the names of failed hypotheses.
#[derive(Clone, Debug, Default)]
pub struct Checklist {
    unmet: Vec<String>,
}

impl Checklist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn require(&mut self, ok: bool, what: impl FnOnce() -> String) -> &mut Self {
        if !ok {
            self.unmet.push(what());
        }
        self
    }

    pub fn extend(&mut self, other: Checklist) -> &mut Self {
        self.unmet.extend(other.unmet);
        self
    }

    pub fn holds(&self) -> bool {
        self.unmet.is_empty()
    }

    pub fn unmet(&self) -> &[String] {
        &self.unmet
    }

    pub fn into_unmet(self) -> Vec<String> {
        self.unmet
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations_and_vacuous_pass() {
        let r = LemmaReport::compare("x", true, 3.0, Relation::AtMost, 2.0);
        assert!(r.violated());
        assert_eq!(r.margin, -1.0);
        let r = LemmaReport::compare("x", false, 3.0, Relation::AtMost, 2.0);
        assert!(r.pass && !r.violated());
        assert!(!Relation::Exceeds.holds(2.0, 2.0));
        assert!(Relation::AtLeast.holds(2.0, 2.0));
        let mut c = Checklist::new();
        c.require(true, || "a".into()).require(false, || "b".into());
        let r = LemmaReport::with_unmet("y", c.into_unmet(), 0.0, Relation::AtLeast, 1.0);
        assert_eq!(r.unmet, vec!["b".to_string()]);
        assert!(r.pass);
        let json = serde_json::to_string(&LemmaReport::new("NB3", true, 2.0, 1.0)).unwrap();
        assert!(json.starts_with(r#"{"lemma":"NB3","hypotheses_hold":true,"lhs":2.0,"rhs":1.0"#));
    }
}
