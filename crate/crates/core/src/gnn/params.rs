use rand::Rng;

use super::{GnnConfig, OutputMode};
use crate::error::{Error, Result};
use crate::forge::seeded_rng;

/// Input widths of the raw vertex encodings.
pub(crate) const V_IN: usize = 4;
pub(crate) const W_IN: usize = 5;

/// Where one MLP lives in the flat parameter vector.
///
/// Layer `k` maps `widths[k]` to `widths[k+1]`; its weight matrix is stored
/// row-major as `widths[k] × widths[k+1]`, followed by its bias.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSlot {
    pub widths: Vec<usize>,
    pub offset: usize,
}

impl MlpSlot {
    pub fn len(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Offsets of `(weight, bias)` of every layer.
    pub(crate) fn layer_offsets(&self) -> Vec<(usize, usize)> {
        let mut at = self.offset;
        self.widths
            .windows(2)
            .map(|w| {
                let weight = at;
                at += w[0] * w[1];
                let bias = at;
                at += w[1];
                (weight, bias)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Round {
    pub f_v: MlpSlot,
    pub f_w: MlpSlot,
    pub g_v: MlpSlot,
    pub g_w: MlpSlot,
}

/// Order of the MLPs in the flat vector: `f_in^V, f_in^W`, then
/// `f_l^V, f_l^W, g_l^V, g_l^W` for each round, then the readout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Layout {
    pub f_in_v: MlpSlot,
    pub f_in_w: MlpSlot,
    pub rounds: Vec<Round>,
    pub out: MlpSlot,
    pub total: usize,
}

impl Layout {
    pub fn new(cfg: &GnnConfig) -> Self {
        let d = cfg.dim;
        let mut offset = 0;
        let mut slot = |widths: Vec<usize>| {
            let s = MlpSlot { widths, offset };
            offset += s.len();
            s
        };
        let f_in_v = slot(vec![V_IN, d, d]);
        let f_in_w = slot(vec![W_IN, d, d]);
        let rounds = (0..cfg.layers)
            .map(|_| Round {
                f_v: slot(vec![d, d, d, d]),
                f_w: slot(vec![d, d, d, d]),
                g_v: slot(vec![2 * d, d, d, d]),
                g_w: slot(vec![2 * d, d, d, d]),
            })
            .collect();
        let out = match cfg.output {
            OutputMode::Scalar => slot(vec![2 * d, d, d, 1]),
            OutputMode::Vertex => slot(vec![3 * d, d, d, 1]),
        };
        Layout { f_in_v, f_in_w, rounds, out, total: offset }
    }

    pub fn slots(&self) -> impl Iterator<Item = &MlpSlot> {
        [&self.f_in_v, &self.f_in_w]
            .into_iter()
            .chain(self.rounds.iter().flat_map(|r| [&r.f_v, &r.f_w, &r.g_v, &r.g_w]))
            .chain(std::iter::once(&self.out))
    }
}

pub fn num_params(cfg: &GnnConfig) -> usize {
    Layout::new(cfg).total
}

/// Name and layer widths of every MLP, in storage order.
pub fn mlp_shapes(cfg: &GnnConfig) -> Vec<(String, Vec<usize>)> {
    let layout = Layout::new(cfg);
    let mut out = vec![
        ("f_in_v".to_string(), layout.f_in_v.widths.clone()),
        ("f_in_w".to_string(), layout.f_in_w.widths.clone()),
    ];
    for (l, r) in layout.rounds.iter().enumerate() {
        let l = l + 1;
        for (name, slot) in [("f", "v", &r.f_v), ("f", "w", &r.f_w), ("g", "v", &r.g_v), ("g", "w", &r.g_w)]
            .map(|(f, side, slot)| (format!("{f}_{l}_{side}"), slot))
        {
            out.push((name, slot.widths.clone()));
        }
    }
    let out_name = match cfg.output {
        OutputMode::Scalar => "f_out",
        OutputMode::Vertex => "f_out_w",
    };
    out.push((out_name.to_string(), layout.out.widths.clone()));
    out
}

/// Parameters of one network, stored flat in [`Layout`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnParams {
    cfg: GnnConfig,
    data: Vec<f64>,
}

impl GnnParams {
    pub fn zeros(cfg: &GnnConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg: *cfg, data: vec![0.0; num_params(cfg)] })
    }

    pub fn from_vec(cfg: &GnnConfig, data: Vec<f64>) -> Result<Self> {
        cfg.validate()?;
        let expected = num_params(cfg);
        if data.len() != expected {
            return Err(Error::DimensionMismatch { what: "parameter vector", expected, got: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("parameters"));
        }
        Ok(Self { cfg: *cfg, data })
    }

    pub fn config(&self) -> &GnnConfig {
        &self.cfg
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub(crate) fn layout(&self) -> Layout {
        Layout::new(&self.cfg)
    }
}

/// Weights uniform in `±1/sqrt(fan_in)`, biases zero.
pub fn init_params(cfg: &GnnConfig, seed: u64) -> Result<GnnParams> {
    let mut p = GnnParams::zeros(cfg)?;
    let layout = p.layout();
    let mut rng = seeded_rng(seed, 0);
    for slot in layout.slots() {
        for (w, &(weight, _)) in slot.widths.windows(2).zip(&slot.layer_offsets()) {
            let scale = 1.0 / (w[0] as f64).sqrt();
            for v in &mut p.data[weight..weight + w[0] * w[1]] {
                *v = rng.random_range(-scale..scale);
            }
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hand-counted sizes: `f_in^V = d²+6d`, `f_in^W = d²+7d`, per round
    /// `2·3(d²+d) + 2(4d²+3d)`, readout `3d²+3d+1` (scalar) or `4d²+3d+1`.
    fn closed_form(l: usize, d: usize, output: OutputMode) -> usize {
        let out = match output {
            OutputMode::Scalar => 3 * d * d + 3 * d + 1,
            OutputMode::Vertex => 4 * d * d + 3 * d + 1,
        };
        (d * d + 6 * d) + (d * d + 7 * d) + l * (6 * (d * d + d) + 2 * (4 * d * d + 3 * d)) + out
    }

    #[test]
    fn counts() {
        let small = GnnConfig::new(1, 2, OutputMode::Scalar).unwrap();
        assert_eq!(num_params(&small), 133);
        let names: Vec<_> = mlp_shapes(&small).into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, ["f_in_v", "f_in_w", "f_1_v", "f_1_w", "g_1_v", "g_1_w", "f_out"]);
        for l in 1..4 {
            for d in [1, 2, 4, 8, 64] {
                for o in [OutputMode::Scalar, OutputMode::Vertex] {
                    assert_eq!(num_params(&GnnConfig::new(l, d, o).unwrap()), closed_form(l, d, o));
                }
            }
        }
    }

    #[test]
    fn init_is_seeded() {
        let cfg = GnnConfig::new(2, 4, OutputMode::Vertex).unwrap();
        let a = init_params(&cfg, 1).unwrap();
        assert_eq!(a, init_params(&cfg, 1).unwrap());
        assert_ne!(a, init_params(&cfg, 2).unwrap());
        let layout = a.layout();
        for slot in layout.slots() {
            for (w, &(_, bias)) in slot.widths.windows(2).zip(&slot.layer_offsets()) {
                assert!(a.as_slice()[bias..bias + w[1]].iter().all(|&b| b == 0.0));
            }
        }
        let s = layout.f_in_v.layer_offsets()[0].0;
        assert!(a.as_slice()[s..s + 16].iter().all(|v| v.abs() < 0.5));
        assert!(GnnConfig::new(0, 4, OutputMode::Scalar).is_err());
        assert!(GnnParams::from_vec(&cfg, vec![0.0; 3]).is_err());
    }
}
