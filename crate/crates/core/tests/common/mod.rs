#![allow(dead_code)]

pub mod hp;

use hp::{H, M2};
use spdmeans::means::{MeanProblem, WeightVector};
use spdmeans::spd::{random_spd_from, random_weights, RandomEnsembleConfig, ScalarField, SpdMatrix, Substream};

/// Symmetric 2×2 real instance shared by the library and the reference evaluator.
pub struct Instance2 {
    pub weights: Vec<f64>,
    pub rows: Vec<[f64; 4]>,
}

impl Instance2 {
    pub fn new(weights: Vec<f64>, rows: Vec<[f64; 4]>) -> Self {
        Instance2 { weights, rows }
    }

    /// `m` random real 2×2 matrices with condition numbers in `[1, cond]`, random weights.
    pub fn random(seed: u64, m: usize, cond: f64) -> Self {
        let cfg = RandomEnsembleConfig::new(2, m, [1.0, cond], ScalarField::Real, seed);
        let stream = Substream::root(seed);
        let mats = random_spd_from(&stream.child(0), &cfg).unwrap();
        let weights = random_weights(&mut stream.child(1).rng(), m);
        let rows = mats
            .iter()
            .map(|a| {
                let x = a.matrix();
                let off = 0.5 * (x[(0, 1)].re + x[(1, 0)].re);
                [x[(0, 0)].re, off, off, x[(1, 1)].re]
            })
            .collect();
        Instance2 { weights, rows }
    }

    pub fn spd(&self) -> Vec<SpdMatrix> {
        self.rows.iter().map(|r| SpdMatrix::from_real_rows(2, r).unwrap()).collect()
    }

    pub fn problem(&self) -> MeanProblem {
        MeanProblem::new(WeightVector::new(self.weights.clone()).unwrap(), self.spd()).unwrap()
    }

    pub fn hp(&self) -> Vec<M2> {
        self.rows.iter().map(|r| M2::new(*r)).collect()
    }
}

pub fn to_m2(a: &SpdMatrix) -> M2 {
    let x = a.matrix();
    M2::new([x[(0, 0)].re, x[(0, 1)].re, x[(1, 0)].re, x[(1, 1)].re])
}

/// `‖lib - reference‖_F / ‖reference‖_F`, evaluated in high precision.
pub fn rel_err(lib: &SpdMatrix, reference: &M2) -> f64 {
    (to_m2(lib).dist(reference) / reference.frobenius()).to_f64()
}

pub fn rel_err_scalar(lib: f64, reference: &H) -> f64 {
    ((H::from_f64(lib) - reference.clone()).abs() / reference.abs()).to_f64()
}
