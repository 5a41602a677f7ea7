//! Canonical JSON form of a system:
//! `{"n": 2, "rhs": [[{"coeff": 1.0, "exponents": [0, 1]}], ...]}`.

use carleman_core::model::compile;
use carleman_core::{Monomial, PolyOde};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonMonomial {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonSystem {
    pub n: usize,
    pub rhs: Vec<Vec<JsonMonomial>>,
}

impl JsonSystem {
    pub fn from_monomials(n: usize, rhs: &[Vec<Monomial>]) -> Self {
        let rhs = rhs
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|m| JsonMonomial {
                        coeff: m.coeff,
                        exponents: m.exponents.clone(),
                    })
                    .collect()
            })
            .collect();
        JsonSystem { n, rhs }
    }

    pub fn from_ode(ode: &PolyOde) -> Self {
        Self::from_monomials(ode.dim(), &ode.to_monomials())
    }

    pub fn monomials(&self) -> Vec<Vec<Monomial>> {
        self.rhs
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|m| Monomial::new(m.coeff, m.exponents.clone()))
                    .collect()
            })
            .collect()
    }

    pub fn compile(&self) -> carleman_core::Result<PolyOde> {
        compile(&self.monomials(), self.n)
    }
}

pub fn parse(text: &str) -> serde_json::Result<JsonSystem> {
    serde_json::from_str(text)
}

pub fn to_string(system: &JsonSystem) -> String {
    serde_json::to_string_pretty(system).expect("plain data always serializes")
}
