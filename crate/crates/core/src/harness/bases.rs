use serde::Serialize;

use super::config::{BasisSelection, SicConfig};
use super::HarnessError;
use crate::hilbert::galois::prime_power;
use crate::hilbert::{
    build_angular_basis, build_logical_basis, build_mub_family, build_sic_povm, certify_sic, logical_index_map,
    BasisVector, FiducialCache, ModeBasis, ModeBasisKind, OamIndexMap,
};

/// The bases evaluated at one dimension, in report order.
#[derive(Clone, Debug)]
pub struct DimensionBases {
    pub dim: usize,
    pub map: OamIndexMap,
    pub bases: Vec<ModeBasis>,
    /// Only part of a complete MUB family exists for this dimension.
    pub partial_family: bool,
    pub fiducial: Option<FiducialRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiducialRecord {
    pub dim: usize,
    pub seed: u64,
    pub max_equiangular_deviation: f64,
    pub identity_residual: f64,
    pub fiducial: Vec<(f64, f64)>,
}

fn is_prime(d: usize) -> bool {
    matches!(prime_power(d), Some((_, 1)))
}

pub fn build_dimension_bases(
    dim: usize,
    selection: &BasisSelection,
    sic: &SicConfig,
    cache: Option<&mut FiducialCache>,
) -> Result<DimensionBases, HarnessError> {
    let map = logical_index_map(dim)?;
    let mut bases = Vec::new();
    let mut partial_family = false;
    if selection.mub_family {
        let fam = build_mub_family(dim)?;
        partial_family = fam.partial;
        bases.extend(fam.bases);
    } else if selection.logical {
        bases.push(build_logical_basis(dim)?);
    }
    if selection.angular {
        let present = bases.iter().any(|b| b.kind() == ModeBasisKind::Angular);
        // For prime d the first MUB is the angular basis itself.
        let duplicate = selection.mub_family && is_prime(dim);
        if !present && !duplicate {
            bases.push(build_angular_basis(dim)?);
        }
    }
    let mut fiducial = None;
    if selection.sic {
        let vec: BasisVector = match cache {
            Some(c) => c.get_or_search(dim, sic.seed, &sic.search)?,
            None => crate::hilbert::find_sic_fiducial(dim, sic.seed, &sic.search)?,
        };
        let povm = build_sic_povm(dim, &vec)?;
        let cert = certify_sic(&povm, sic.search.tol)?;
        fiducial = Some(FiducialRecord {
            dim,
            seed: sic.seed,
            max_equiangular_deviation: cert.max_equiangular_deviation,
            identity_residual: cert.identity_residual,
            fiducial: vec.phase_normalized().coeffs().iter().map(|c| (c.re, c.im)).collect(),
        });
        bases.push(povm);
    }
    Ok(DimensionBases {
        dim,
        map,
        bases,
        partial_family,
        fiducial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(d: usize, sel: &BasisSelection) -> Vec<String> {
        build_dimension_bases(d, sel, &SicConfig::default(), None)
            .unwrap()
            .bases
            .iter()
            .map(ModeBasis::tag)
            .collect()
    }

    #[test]
    fn default_selection_per_dimension() {
        let sel = BasisSelection::default();
        assert_eq!(tags(2, &sel), ["MUB0", "MUB1", "MUB2"]);
        assert_eq!(tags(3, &sel).len(), 4);
        assert_eq!(tags(4, &sel), ["MUB0", "MUB1", "MUB2", "MUB3", "MUB4", "ANG"]);
        assert_eq!(tags(6, &sel), ["MUB0", "ANG"]);
        assert_eq!(tags(8, &sel).len(), 10);
    }

    #[test]
    fn logical_and_angular_only() {
        let sel = BasisSelection {
            mub_family: false,
            logical: true,
            angular: true,
            sic: false,
        };
        assert_eq!(tags(5, &sel), ["MUB0", "ANG"]);
    }

    #[test]
    fn sic_is_certified() {
        let sel = BasisSelection {
            mub_family: false,
            logical: false,
            angular: false,
            sic: true,
        };
        let b = build_dimension_bases(3, &sel, &SicConfig::default(), None).unwrap();
        assert_eq!(b.bases.len(), 1);
        assert_eq!(b.bases[0].len(), 9);
        let rec = b.fiducial.unwrap();
        assert!(rec.max_equiangular_deviation <= 1e-8);
    }
}
