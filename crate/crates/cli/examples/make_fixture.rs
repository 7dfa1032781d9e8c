//! Writes the 16×16 fixture image and classifier used by the tests and the
//! sample configs.
//!
//! The image is a textured disk (radius 6, so it stays inside the frame under
//! any rotation) on a dark background. The network reads a Gaussian-weighted
//! mean color around the center through a ReLU layer and scores ten class
//! prototypes by negative squared distance.
//!
//!     cargo run -p aegen-cli --example make_fixture -- crates/cli/fixtures

use std::path::PathBuf;

use aegen_core::imaging::{write_image, Image};
use aegen_core::oracle::{Activation, DenseLayer, Mlp};

const SIZE: usize = 16;
const RADIUS: f64 = 6.0;
const TEMPERATURE: f64 = 400.0;
const SIGMA: f64 = 2.5;

const BACKGROUND: [f64; 3] = [40.0, 45.0, 70.0];
const DISK: [f64; 3] = [70.0, 150.0, 60.0];

/// Class prototypes as offsets from the clean disk color.
const CLASSES: [(&str, [f64; 3]); 10] = [
    ("airplane", [80.0, 40.0, 120.0]),
    ("automobile", [-30.0, -60.0, 60.0]),
    ("bird", [40.0, -20.0, 0.0]),
    ("cat", [60.0, -40.0, 10.0]),
    ("deer", [30.0, -30.0, -15.0]),
    ("dog", [70.0, -20.0, 20.0]),
    ("frog", [0.0, 0.0, 0.0]),
    ("horse", [50.0, -60.0, -10.0]),
    ("ship", [-20.0, -50.0, 90.0]),
    ("truck", [0.0, -90.0, 50.0]),
];

fn in_disk(x: usize, y: usize) -> bool {
    let c = (SIZE as f64 - 1.0) / 2.0;
    let (dx, dy) = (x as f64 - c, y as f64 - c);
    dx * dx + dy * dy <= RADIUS * RADIUS
}

// small deterministic texture in −8..=8
fn texture(x: usize, y: usize, c: usize) -> f64 {
    let mut h = (x as u32).wrapping_mul(73_856_093) ^ (y as u32).wrapping_mul(19_349_663) ^ (c as u32).wrapping_mul(83_492_791);
    h ^= h >> 13;
    h = h.wrapping_mul(0x5bd1_e995);
    h ^= h >> 15;
    (h % 17) as f64 - 8.0
}

fn clean_image() -> Image {
    let mut img = Image::filled(SIZE, SIZE, 3, 0.0);
    for y in 0..SIZE {
        for x in 0..SIZE {
            let base = if in_disk(x, y) { DISK } else { BACKGROUND };
            for c in 0..3 {
                img.set(x, y, c, base[c] + texture(x, y, c));
            }
        }
    }
    img
}

fn network(clean: &Image) -> Mlp {
    let c = (SIZE as f64 - 1.0) / 2.0;
    let raw: Vec<f64> = (0..SIZE * SIZE)
        .map(|k| {
            let (dx, dy) = ((k % SIZE) as f64 - c, (k / SIZE) as f64 - c);
            (-(dx * dx + dy * dy) / (2.0 * SIGMA * SIGMA)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let share: Vec<f64> = raw.iter().map(|w| w / total).collect();

    let mut hidden = vec![0.0f32; 3 * SIZE * SIZE * 3];
    let mut mean = [0.0; 3];
    for ch in 0..3 {
        for (k, &w) in share.iter().enumerate() {
            hidden[ch * SIZE * SIZE * 3 + k * 3 + ch] = w as f32;
            mean[ch] += w * clean.get(k % SIZE, k / SIZE, ch);
        }
    }

    let mut weights = Vec::with_capacity(CLASSES.len() * 3);
    let mut biases = Vec::with_capacity(CLASSES.len());
    for (_, offset) in CLASSES {
        let p: Vec<f64> = (0..3).map(|c| (mean[c] + offset[c]).clamp(0.0, 255.0)).collect();
        weights.extend(p.iter().map(|v| (2.0 * v / TEMPERATURE) as f32));
        biases.push((-p.iter().map(|v| v * v).sum::<f64>() / TEMPERATURE) as f32);
    }
    let layers = vec![
        DenseLayer { rows: 3, cols: SIZE * SIZE * 3, activation: Activation::Relu, weights: hidden, biases: vec![0.0; 3] },
        DenseLayer { rows: CLASSES.len(), cols: 3, activation: Activation::None, weights, biases },
    ];
    let labels = CLASSES.iter().map(|(l, _)| l.to_string()).collect();
    Mlp::new("disk16", (SIZE, SIZE, 3), labels, layers).expect("consistent fixture network")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/cli/fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    let clean = clean_image();
    let net = network(&clean);
    write_image(&clean, dir.join("frog16.ppm"))?;
    net.save(dir.join("disk16.aemlp"))?;
    let probs = net.probabilities(clean.data());
    for (label, p) in net.labels().iter().zip(probs) {
        println!("{label:>10} {p:.4}");
    }
    Ok(())
}
