//! Feed-forward policies loaded from flat weight files.
//!
//! File layout, all little-endian:
//!
//! | field   | type                 | value                                  |
//! |---------|----------------------|----------------------------------------|
//! | magic   | 4 bytes              | `VBFF`                                 |
//! | version | u32                  | 1                                      |
//! | layers  | u32                  | number of affine layers L >= 1         |
//! | sizes   | (L + 1) x u32        | input width, hidden widths, output 4   |
//! | params  | f64 per layer        | weights (out x in, row-major), bias    |
//!
//! Hidden layers use tanh; the output layer is linear. See
//! `docs/weights_format.md`.

use std::path::Path;

use rand::RngCore;

use super::{Policy, PolicyContext};
use crate::dynamics::{BodyRateCommand, RotorThrusts, ROTORS};
use crate::error::{Error, Result};
use crate::tasks::{Action, ActionMode};

pub const MAGIC: &[u8; 4] = b"VBFF";
pub const VERSION: u32 = 1;
pub const OUTPUT_WIDTH: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major, `outputs` rows of `inputs` columns.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeedForward {
    pub layers: Vec<Layer>,
}

impl FeedForward {
    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().expect("at least one layer").outputs
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let last = self.layers.len() - 1;
        let mut h = x.to_vec();
        for (k, l) in self.layers.iter().enumerate() {
            h = (0..l.outputs)
                .map(|o| {
                    let row = &l.weights[o * l.inputs..(o + 1) * l.inputs];
                    let z = l.bias[o] + row.iter().zip(&h).map(|(w, v)| w * v).sum::<f64>();
                    if k == last {
                        z
                    } else {
                        z.tanh()
                    }
                })
                .collect();
        }
        h
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        out.extend(VERSION.to_le_bytes());
        out.extend((self.layers.len() as u32).to_le_bytes());
        out.extend((self.input_width() as u32).to_le_bytes());
        for l in &self.layers {
            out.extend((l.outputs as u32).to_le_bytes());
        }
        for l in &self.layers {
            for v in l.weights.iter().chain(&l.bias) {
                out.extend(v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::config(format!("weights file: {m}"));
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            let s = bytes.get(pos..pos + n).ok_or_else(|| bad("truncated"))?;
            pos += n;
            Ok(s)
        };
        if take(4)? != MAGIC {
            return Err(bad("missing VBFF magic"));
        }
        let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().expect("4 bytes"));
        let version = u32_at(take(4)?);
        if version != VERSION {
            return Err(bad(&format!("version {version} is not supported (expected {VERSION})")));
        }
        let n = u32_at(take(4)?) as usize;
        if n == 0 || n > 64 {
            return Err(bad("layer count must be in 1..=64"));
        }
        let mut sizes = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            let s = u32_at(take(4)?) as usize;
            if s == 0 || s > 1 << 16 {
                return Err(bad("layer width must be in 1..=65536"));
            }
            sizes.push(s);
        }
        let mut layers = Vec::with_capacity(n);
        for w in sizes.windows(2) {
            let (inputs, outputs) = (w[0], w[1]);
            let mut read = |count: usize| -> Result<Vec<f64>> {
                let raw = take(count * 8)?;
                Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
            };
            let weights = read(inputs * outputs)?;
            let bias = read(outputs)?;
            if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
                return Err(bad("non-finite parameter"));
            }
            layers.push(Layer { inputs, outputs, weights, bias });
        }
        if pos != bytes.len() {
            return Err(bad("trailing bytes"));
        }
        let net = FeedForward { layers };
        if net.output_width() != OUTPUT_WIDTH {
            return Err(bad(&format!("output width must be {OUTPUT_WIDTH}")));
        }
        Ok(net)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::config(format!("cannot read weights {}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }
}

/// Map a network output onto the action space.
pub fn to_action(y: &[f64], mode: ActionMode, rate_limit: f64) -> Action {
    let unit = |v: f64| ((v + 1.0) / 2.0).clamp(0.0, 1.0);
    let finite = |v: f64| if v.is_finite() { v } else { 0.0 };
    match mode {
        ActionMode::Prt => {
            let mut t = [0.0; ROTORS];
            for (i, x) in t.iter_mut().enumerate() {
                *x = unit(finite(y[i]));
            }
            Action::Rotor(RotorThrusts::new(t))
        }
        ActionMode::Ctbr => Action::Ctbr(BodyRateCommand {
            thrust: unit(finite(y[0])),
            rates: [1, 2, 3].map(|i| finite(y[i]).clamp(-1.0, 1.0) * rate_limit),
        }),
    }
}

/// Runs the same network on every controlled drone's observation.
pub struct ExternalPolicy {
    net: FeedForward,
    label: String,
}

impl ExternalPolicy {
    pub fn new(net: FeedForward, label: impl Into<String>) -> Self {
        ExternalPolicy { net, label: label.into() }
    }

    pub fn network(&self) -> &FeedForward {
        &self.net
    }
}

impl Policy for ExternalPolicy {
    fn reset(&mut self, _ctx: &PolicyContext<'_>, _rng: &mut dyn RngCore) {}

    fn act(&mut self, ctx: &PolicyContext<'_>, _rng: &mut dyn RngCore) -> Vec<Action> {
        ctx.controlled
            .iter()
            .map(|&d| to_action(&self.net.forward(&ctx.obs[d]), ctx.spec.action_mode, ctx.drone.rate_limit))
            .collect()
    }

    fn name(&self) -> String {
        self.label.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> FeedForward {
        FeedForward {
            layers: vec![
                Layer { inputs: 2, outputs: 3, weights: vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0], bias: vec![0.0, 0.0, 0.5] },
                Layer { inputs: 3, outputs: 4, weights: (0..12).map(|i| i as f64 * 0.1).collect(), bias: vec![0.0; 4] },
            ],
        }
    }

    #[test]
    fn round_trip() {
        let net = tiny();
        assert_eq!(FeedForward::from_bytes(&net.to_bytes()).unwrap(), net);
    }

    #[test]
    fn forward_matches_hand_computation() {
        let y = tiny().forward(&[0.5, -0.25]);
        let h = [0.5f64.tanh(), (-0.25f64).tanh(), 0.75f64.tanh()];
        let want0 = 0.0 * h[0] + 0.1 * h[1] + 0.2 * h[2];
        assert!((y[0] - want0).abs() < 1e-15);
    }

    #[test]
    fn corrupt_files_are_config_errors() {
        let bytes = tiny().to_bytes();
        for bad in [&bytes[..bytes.len() - 1], &bytes[1..], &[&bytes[..], &[0u8]].concat()[..]] {
            assert!(FeedForward::from_bytes(bad).unwrap_err().is_config());
        }
        let mut v2 = bytes.clone();
        v2[4] = 2;
        assert!(FeedForward::from_bytes(&v2).unwrap_err().is_config());
    }

    #[test]
    fn actions_are_saturated() {
        match to_action(&[9.0, -9.0, f64::NAN, 0.0], ActionMode::Prt, 6.0) {
            Action::Rotor(t) => assert_eq!(t.0, [1.0, 0.0, 0.5, 0.5]),
            a => panic!("{a:?}"),
        }
        match to_action(&[0.0, 5.0, -5.0, 0.5], ActionMode::Ctbr, 6.0) {
            Action::Ctbr(c) => assert_eq!(c.rates, [6.0, -6.0, 3.0]),
            a => panic!("{a:?}"),
        }
    }
}
