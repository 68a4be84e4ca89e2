//! Certificate cones: parameterizations, membership deciders and witness
//! checks.

mod circuit;
mod decide;
mod param;
mod witness;

pub use circuit::{check_circuit, Circuit, CircuitWitness};
pub use decide::{default_basis, dsos_decide, sdsos_decide, soms_check, DsosOutcome, SdsosOutcome};
pub use param::{cone_param, recover_witness, ConeParam, ParamColumn};
pub use witness::{psd_check, verify_witness, GramFlavor, GramWitness, SddBlock, SomsWitness, Witness, WitnessReport};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConeClass {
    Soms,
    Dsos,
    Sdsos,
    /// Full SOS: accepted only as externally supplied Gram witnesses.
    SosExternal,
    /// SONC: circuit witnesses are checked, never searched for.
    SoncVerifyOnly,
    /// SAGE: recognized in files, otherwise unsupported.
    SageUnsupported,
}

impl ConeClass {
    /// Cones the builder can search over.
    pub fn searchable(self) -> bool {
        matches!(self, ConeClass::Soms | ConeClass::Dsos | ConeClass::Sdsos)
    }

    /// Closed under sums and multiplication by a variable, which the merged
    /// template shape relies on.
    pub fn allows_merged(self) -> bool {
        !matches!(self, ConeClass::Soms)
    }

    pub fn name(self) -> &'static str {
        match self {
            ConeClass::Soms => "soms",
            ConeClass::Dsos => "dsos",
            ConeClass::Sdsos => "sdsos",
            ConeClass::SosExternal => "sos",
            ConeClass::SoncVerifyOnly => "sonc",
            ConeClass::SageUnsupported => "sage",
        }
    }
}

impl fmt::Display for ConeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConeClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "soms" => Ok(ConeClass::Soms),
            "dsos" => Ok(ConeClass::Dsos),
            "sdsos" => Ok(ConeClass::Sdsos),
            "sos" => Ok(ConeClass::SosExternal),
            "sonc" => Ok(ConeClass::SoncVerifyOnly),
            "sage" => Ok(ConeClass::SageUnsupported),
            other => Err(format!("unknown cone '{other}' (expected soms, dsos, sdsos, sos, sonc or sage)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConeError {
    #[error("monomial {0} of the polynomial is not a product of two basis elements")]
    BasisTooSmall(String),
    #[error("basis monomials have {0} variables, polynomial has {1}")]
    BasisArity(usize, usize),
    #[error("cone {0} is not supported here")]
    Unsupported(ConeClass),
}
