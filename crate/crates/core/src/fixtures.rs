//! Small reference layers and seeded synthetic data generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geo::{LandUseFeature, LandUseLayer, DEFAULT_CODE_ATTRIBUTE};

/// Buffer used with [`village_layer`]: touching polygons are neighbors, every
/// other pair is at least 2 m apart.
pub const VILLAGE_BUFFER: f64 = 1.0;

/// Seven-polygon village layout (codes C/W/B/G) whose neighborhood
/// transactions at [`VILLAGE_BUFFER`] are:
///
/// ```text
/// 1 C  {B C G}     5 B  {B C}
/// 2 W  {B C W}     6 B  {B C W}
/// 3 C  {B C}       7 G  {C G}
/// 4 C  {B C G W}
/// ```
pub fn village_layer() -> LandUseLayer {
    let features = vec![
        LandUseFeature::rect("1", "C", 10.0, 10.0, 30.0, 20.0),
        LandUseFeature::rect("2", "W", 17.0, 30.0, 33.0, 40.0),
        LandUseFeature::new(
            "3",
            "C",
            vec![
                [30.0, 10.0],
                [40.0, 10.0],
                [40.0, 30.0],
                [35.0, 30.0],
                [35.0, 15.0],
                [30.0, 15.0],
            ],
            Vec::new(),
        ),
        LandUseFeature::rect("4", "C", 15.0, 20.0, 25.0, 30.0),
        LandUseFeature::rect("5", "B", 30.0, 15.0, 35.0, 20.0),
        LandUseFeature::rect("6", "B", 25.0, 20.0, 35.0, 30.0),
        LandUseFeature::rect("7", "G", 10.0, 20.0, 15.0, 30.0),
    ];
    LandUseLayer::new("VILLAGE", features, DEFAULT_CODE_ATTRIBUTE).expect("non-empty")
}

/// The final transactions of the village example, in polygon order.
pub fn village_transactions() -> Vec<Vec<&'static str>> {
    vec![
        vec!["C", "B", "G"],
        vec!["W", "C", "B"],
        vec!["C", "B"],
        vec!["C", "G", "B", "W"],
        vec!["B", "C"],
        vec!["B", "C", "W"],
        vec!["G", "C"],
    ]
}

pub const VILLAGE_TRANSACTIONS_TEXT: &str = "B C G\nB C W\nB C\nB C G W\nB C\nB C W\nC G\n";

/// Square cells on a `cols x rows` grid separated by `gap` meters.
/// `code_at(col, row)` chooses each cell's code.
pub fn grid_layer(
    city: &str,
    cols: usize,
    rows: usize,
    cell: f64,
    gap: f64,
    mut code_at: impl FnMut(usize, usize) -> String,
) -> LandUseLayer {
    let mut features = Vec::with_capacity(cols * rows);
    for row in 0..rows {
        for col in 0..cols {
            let x0 = col as f64 * (cell + gap);
            let y0 = row as f64 * (cell + gap);
            features.push(LandUseFeature::rect(
                &format!("r{row}c{col}"),
                &code_at(col, row),
                x0,
                y0,
                x0 + cell,
                y0 + cell,
            ));
        }
    }
    LandUseLayer::new(city, features, DEFAULT_CODE_ATTRIBUTE).expect("grid is non-empty")
}

/// Random axis-aligned rectangles with random codes; some overlap, some touch.
pub fn random_layer(seed: u64, features: usize, codes: usize) -> LandUseLayer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = (0..features)
        .map(|i| {
            let x = rng.gen_range(0.0..500.0_f64).round();
            let y = rng.gen_range(0.0..500.0_f64).round();
            let w = rng.gen_range(5.0..60.0_f64).round();
            let h = rng.gen_range(5.0..60.0_f64).round();
            let code = format!("{}", 11100 + 100 * rng.gen_range(0..codes));
            LandUseFeature::rect(&format!("f{i}"), &code, x, y, x + w, y + h)
        })
        .collect();
    LandUseLayer::new(format!("RANDOM{seed}"), features, DEFAULT_CODE_ATTRIBUTE).expect("non-empty")
}

/// The two structural families of the synthetic city bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Housing blocks adjoin commerce, with sports grounds in between.
    Mixed,
    /// Housing blocks adjoin green space and farmland.
    Garden,
}

impl Family {
    fn codes(self) -> [&'static str; 3] {
        match self {
            Family::Mixed => ["11210", "12100", "14200"],
            Family::Garden => ["11230", "14100", "21000"],
        }
    }
}

/// One synthetic city: a 12 x 12 grid of 100 m blocks with 20 m streets.
/// Blocks follow the family's stripe pattern; a seeded fraction of blocks is
/// replaced by codes drawn from a shared pool.
pub fn synthetic_city(name: &str, family: Family, seed: u64) -> LandUseLayer {
    const SHARED: [&str; 3] = ["12220", "31000", "50000"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let codes = family.codes();
    let noise = 0.08;
    grid_layer(name, 12, 12, 100.0, 20.0, |col, row| {
        if rng.gen_bool(noise) {
            (*SHARED.choose(&mut rng).expect("non-empty")).to_owned()
        } else {
            codes[(col + 2 * row) % 3].to_owned()
        }
    })
}

/// Six cities, three per family, named `CITY_A1..A3` and `CITY_B1..B3`.
pub fn synthetic_bundle(seed: u64) -> Vec<(LandUseLayer, Family)> {
    let mut out = Vec::new();
    for (prefix, family) in [("A", Family::Mixed), ("B", Family::Garden)] {
        for i in 1..=3u64 {
            let name = format!("CITY_{prefix}{i}");
            let city_seed = seed
                .wrapping_mul(1_000_003)
                .wrapping_add(i + if family == Family::Garden { 100 } else { 0 });
            out.push((synthetic_city(&name, family, city_seed), family));
        }
    }
    out
}
