//! Synthetic XOR benchmark sets and noise-extended real sets.

use rand::Rng;

use crate::contrast::add_noise_attributes;
use crate::dataset::{AttributeMeta, Dataset};
use crate::{rng, Error, Result};

/// Attributes relevant by design in every XOR set: two base attributes and
/// eight linear combinations of them.
pub const XOR_RELEVANT: usize = 10;

const OBJECT_COUNTS: [usize; 5] = [125, 250, 500, 1000, 2000];
const ATTRIBUTE_COUNTS: [usize; 6] = [125, 250, 500, 1000, 2000, 4000];

/// Class of a point given its two base attributes: 1 when exactly one of
/// them is positive.
pub fn xor_class(a: f64, b: f64) -> u32 {
    ((a > 0.0) != (b > 0.0)) as u32
}

/// Draws the eight linear-combination coefficient pairs, re-drawing pairs
/// whose coefficients are both (nearly) zero.
fn draw_coefficients<R: Rng>(rng: &mut R) -> Vec<(f64, f64)> {
    (0..XOR_RELEVANT - 2)
        .map(|_| loop {
            let c1 = rng.gen_range(-1.0..=1.0);
            let c2 = rng.gen_range(-1.0..=1.0);
            if f64::abs(c1) >= 1e-6 || f64::abs(c2) >= 1e-6 {
                break (c1, c2);
            }
        })
        .collect()
}

/// XOR set: attributes 1 and 2 are uniform on `[-1, 1]` and define the class,
/// attributes 3 to 10 are fixed linear combinations of them, and the rest is
/// uniform noise on `[-1, 1]`. Attribute names are `A1..An`.
pub fn generate_xor_set(n_objects: usize, n_attributes: usize, seed: u64) -> Result<Dataset> {
    if n_attributes < XOR_RELEVANT {
        return Err(Error::InvalidInput(format!(
            "an XOR set needs at least {XOR_RELEVANT} attributes, got {n_attributes}"
        )));
    }
    if n_objects < 4 {
        return Err(Error::InvalidInput(format!(
            "an XOR set needs at least 4 objects, got {n_objects}"
        )));
    }
    let mut rng = rng::seeded(seed);
    let coefficients = draw_coefficients(&mut rng);
    let uniform = |rng: &mut rng::StreamRng| -> Vec<f64> {
        (0..n_objects).map(|_| rng.gen_range(-1.0..=1.0)).collect()
    };
    let a = uniform(&mut rng);
    let b = uniform(&mut rng);
    let decision = a.iter().zip(&b).map(|(&x, &y)| xor_class(x, y)).collect();

    let mut columns = Vec::with_capacity(n_attributes);
    for &(c1, c2) in &coefficients {
        columns.push(a.iter().zip(&b).map(|(&x, &y)| c1 * x + c2 * y).collect());
    }
    columns.insert(0, b);
    columns.insert(0, a);
    for _ in XOR_RELEVANT..n_attributes {
        columns.push(uniform(&mut rng));
    }
    let meta = (0..n_attributes)
        .map(|j| AttributeMeta::original(format!("A{}", j + 1)).with_relevance(j < XOR_RELEVANT))
        .collect();
    let coef_note = coefficients
        .iter()
        .map(|(c1, c2)| format!("({c1},{c2})"))
        .collect::<Vec<_>>()
        .join(" ");
    Ok(Dataset::new(columns, meta, decision, vec!["0".into(), "1".into()])?
        .with_note("xor: base attributes uniform on [-1,1], class = xor of signs, no label noise")
        .with_note(format!("xor: noiseless linear combinations A3..A10 with coefficients {coef_note}")))
}

/// The 5 x 6 grid of (objects, attributes), objects varying slowest.
pub fn grid_sizes() -> Vec<(usize, usize)> {
    OBJECT_COUNTS
        .iter()
        .flat_map(|&n| ATTRIBUTE_COUNTS.iter().map(move |&p| (n, p)))
        .collect()
}

/// One noise-extended copy of `data` per requested total width. Original
/// attributes get unknown design relevance.
pub fn extend_real_set(data: &Dataset, target_totals: &[usize], seed: u64) -> Result<Vec<Dataset>> {
    let base = data.with_meta(
        data.meta()
            .iter()
            .map(|m| AttributeMeta {
                relevant: None,
                ..m.clone()
            })
            .collect(),
    )?;
    target_totals
        .iter()
        .enumerate()
        .map(|(k, &total)| {
            add_noise_attributes(&base, total, rng::derive_seed(seed, &[k as u64, total as u64]))
                .map(|d| d.with_note("noise: i.i.d. uniform [0,1)"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_base_points() {
        let pts = [(0.5, 0.5), (-0.5, 0.5), (0.5, -0.5), (-0.5, -0.5)];
        let classes: Vec<u32> = pts.iter().map(|&(a, b)| xor_class(a, b)).collect();
        assert_eq!(classes, vec![0, 1, 1, 0]);
    }

    #[test]
    fn design_relevance_layout() {
        let d = generate_xor_set(125, 125, 1).unwrap();
        assert_eq!(d.n_attributes(), 125);
        let relevant = d.meta().iter().filter(|m| m.relevant == Some(true)).count();
        assert_eq!(relevant, 10);
        assert!(d.meta()[..10].iter().all(|m| m.relevant == Some(true)));
        assert!(generate_xor_set(100, 9, 1).is_err());
        assert!(generate_xor_set(3, 10, 1).is_err());
    }

    #[test]
    fn grid_layout() {
        let g = grid_sizes();
        assert_eq!(g.len(), 30);
        assert_eq!(g[0], (125, 125));
        assert_eq!(g[1], (125, 250));
        assert_eq!(*g.last().unwrap(), (2000, 4000));
    }

    #[test]
    fn values_in_range_and_seed_sensitivity() {
        let a = generate_xor_set(50, 20, 5).unwrap();
        let b = generate_xor_set(50, 20, 5).unwrap();
        let c = generate_xor_set(50, 20, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.column(2), c.column(2));
        for j in [0, 1, 10, 19] {
            assert!(a.column(j).iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }
}
