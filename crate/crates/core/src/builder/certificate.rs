use super::SlotKey;
use crate::cones::{ConeClass, Witness};
use crate::poly::{Poly, QuadNum, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Found,
    Supplied,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Found => "found",
            Provenance::Supplied => "supplied",
        }
    }
}

/// A concrete cone member for one template slot, in the slot's own
/// variables.
#[derive(Debug, Clone)]
pub struct CertSlot<C: Scalar> {
    pub key: SlotKey,
    pub poly: Poly<C>,
    pub witness: Witness<C>,
}

#[derive(Debug, Clone)]
pub struct Certificate<C: Scalar> {
    pub cone: ConeClass,
    pub slots: Vec<CertSlot<C>>,
    pub degree: u32,
    pub provenance: Provenance,
    /// Set when a numeric certificate could not be made exact.
    pub approximate: bool,
}

impl<C: Scalar> Certificate<C> {
    pub fn slot(&self, key: &SlotKey) -> Option<&CertSlot<C>> {
        self.slots.iter().find(|s| &s.key == key)
    }

    pub fn to_float(&self) -> Certificate<f64> {
        Certificate {
            cone: self.cone,
            slots: self
                .slots
                .iter()
                .map(|s| CertSlot {
                    key: s.key,
                    poly: s.poly.to_float(),
                    witness: s.witness.map(|c| c.to_f64()),
                })
                .collect(),
            degree: self.degree,
            provenance: self.provenance,
            approximate: self.approximate,
        }
    }
}

#[derive(Debug, Clone)]
pub enum AnyCertificate {
    Exact(Certificate<QuadNum>),
    Float(Certificate<f64>),
}

impl AnyCertificate {
    pub fn is_exact(&self) -> bool {
        matches!(self, AnyCertificate::Exact(_))
    }

    pub fn degree(&self) -> u32 {
        match self {
            AnyCertificate::Exact(c) => c.degree,
            AnyCertificate::Float(c) => c.degree,
        }
    }

    pub fn to_float(&self) -> Certificate<f64> {
        match self {
            AnyCertificate::Exact(c) => c.to_float(),
            AnyCertificate::Float(c) => c.clone(),
        }
    }
}
