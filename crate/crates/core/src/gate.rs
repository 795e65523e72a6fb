//! Reconfigurable chaos-based logic gates.
//!
//! Data bits and a control bit are converted to a seed voltage by a linear DAC,
//! the oscillator is iterated, and each output is thresholded against `vref`.
//! The comparator outputs for the inputs `00, 01, 10, 11` form the truth table,
//! read as a binary number with input `00` as the most significant bit.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{GnmParams, Interval, MapDescriptor, SurrogateConstants, DOMAIN_TOLERANCE};
use crate::oscillator::{iterate, iterate_scheduled, Driver, Schedule, Topology};

/// Where the control bit sits in the DAC code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeOrder {
    /// `code = data << 1 | cb`
    #[default]
    ControlLsb,
    /// `code = cb << k | data`
    ControlMsb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DacSpec {
    pub vmin: f64,
    pub step: f64,
    /// Total DAC width: data inputs plus one control bit.
    pub bits: u32,
    #[serde(default)]
    pub code_order: CodeOrder,
}

impl Default for DacSpec {
    fn default() -> Self {
        Self {
            vmin: 0.1,
            step: 0.3285,
            bits: 3,
            code_order: CodeOrder::ControlLsb,
        }
    }
}

impl DacSpec {
    pub fn data_inputs(&self) -> u32 {
        self.bits - 1
    }

    pub fn max_voltage(&self) -> f64 {
        self.vmin + ((1u64 << self.bits) - 1) as f64 * self.step
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=5).contains(&self.bits) {
            return Err(Error::invalid(
                "dac bits",
                format!("must be in 2..=5, got {}", self.bits),
            ));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::invalid("dac step", format!("must be > 0, got {}", self.step)));
        }
        if !self.vmin.is_finite() {
            return Err(Error::invalid("dac vmin", "must be finite"));
        }
        Ok(())
    }

    pub fn code(&self, input: u32, cb: u8) -> Result<u32> {
        let k = self.data_inputs();
        if input >= 1 << k {
            return Err(Error::invalid(
                "data bits",
                format!("input {input} needs more than {k} bits"),
            ));
        }
        if cb > 1 {
            return Err(Error::invalid("cb", format!("control bit must be 0 or 1, got {cb}")));
        }
        Ok(match self.code_order {
            CodeOrder::ControlLsb => (input << 1) | cb as u32,
            CodeOrder::ControlMsb => ((cb as u32) << k) | input,
        })
    }

    /// Seed voltage `vmin + code·step`.
    pub fn encode(&self, input: u32, cb: u8) -> Result<f64> {
        self.validate()?;
        Ok(self.vmin + self.code(input, cb)? as f64 * self.step)
    }

    /// As [`encode`](Self::encode), rejecting seeds outside `domain`.
    pub fn encode_within(&self, input: u32, cb: u8, domain: &Interval) -> Result<f64> {
        let x0 = self.encode(input, cb)?;
        if !domain.contains(x0, DOMAIN_TOLERANCE) {
            return Err(Error::Config(format!(
                "DAC seed {x0} V (input {input}, cb {cb}) lies outside the map domain [{}, {}]",
                domain.lo(),
                domain.hi()
            )));
        }
        Ok(x0)
    }
}

/// Seed for the two data bits `(b1, b0)` and control bit `cb`.
pub fn dac_encode(data_bits: (u8, u8), cb: u8, dac: &DacSpec) -> Result<f64> {
    let (b1, b0) = data_bits;
    if b1 > 1 || b0 > 1 {
        return Err(Error::invalid(
            "data bits",
            format!("bits must be 0 or 1, got ({b1}, {b0})"),
        ));
    }
    dac.encode(((b1 as u32) << 1) | b0 as u32, cb)
}

/// `1` iff `x > vref`.
pub fn comparator(x: f64, vref: f64) -> u8 {
    u8::from(x > vref)
}

/// A truth table as a decimal id, `0 ..= 2^(2^k) − 1` for `k` inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FunctionId {
    value: u32,
    inputs: u32,
}

const MNEMONICS: [(&str, u32); 6] = [("AND", 1), ("OR", 7), ("XOR", 6), ("NAND", 14), ("NOR", 8), ("XNOR", 9)];

impl FunctionId {
    pub fn new(value: u32, inputs: u32) -> Result<Self> {
        if !(1..=4).contains(&inputs) {
            return Err(Error::invalid(
                "function inputs",
                format!("must be in 1..=4, got {inputs}"),
            ));
        }
        let max = Self::max_value(inputs);
        if value > max {
            return Err(Error::invalid(
                "function id",
                format!("{value} exceeds {max} for {inputs}-input gates"),
            ));
        }
        Ok(Self { value, inputs })
    }

    pub fn two_input(value: u32) -> Result<Self> {
        Self::new(value, 2)
    }

    pub fn max_value(inputs: u32) -> u32 {
        ((1u64 << (1u32 << inputs)) - 1) as u32
    }

    /// Reads comparator outputs listed in input order (`00`, `01`, ...),
    /// the first being the most significant bit.
    pub fn from_outputs(bits: &[u8]) -> Result<Self> {
        let rows = bits.len();
        if !rows.is_power_of_two() || rows < 2 {
            return Err(Error::invalid("truth table", format!("{rows} rows is not 2^k")));
        }
        let value = bits.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b != 0));
        Self::new(value, rows.trailing_zeros())
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn inputs(&self) -> u32 {
        self.inputs
    }

    /// Output for input row `i`.
    pub fn output(&self, i: u32) -> u8 {
        let rows = 1u32 << self.inputs;
        ((self.value >> (rows - 1 - i)) & 1) as u8
    }

    pub fn complement(&self) -> Self {
        Self {
            value: Self::max_value(self.inputs) - self.value,
            inputs: self.inputs,
        }
    }

    pub fn mnemonic(&self) -> Option<&'static str> {
        if self.inputs != 2 {
            return None;
        }
        MNEMONICS.iter().find(|(_, v)| *v == self.value).map(|(n, _)| *n)
    }

    /// Parses a decimal id or one of `AND, OR, XOR, NAND, NOR, XNOR`.
    pub fn parse(s: &str, inputs: u32) -> Result<Self> {
        let s = s.trim();
        if let Ok(v) = s.parse::<u32>() {
            return Self::new(v, inputs);
        }
        if inputs == 2 {
            if let Some((_, v)) = MNEMONICS.iter().find(|(n, _)| n.eq_ignore_ascii_case(s)) {
                return Self::new(*v, 2);
            }
        }
        Err(Error::invalid(
            "function",
            format!("{s:?} is neither a decimal id nor a known mnemonic"),
        ))
    }
}

impl FromStr for FunctionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, 2)
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mnemonic() {
            Some(m) => write!(f, "{}({m})", self.value),
            None => write!(f, "{}", self.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamSource {
    Constant(GnmParams),
    Scheduled(Schedule),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateConfig {
    pub params: ParamSource,
    pub constants: SurrogateConstants,
    pub cb: u8,
    pub vref: f64,
    /// Decision iteration, counted from 1 at the first fed-back output.
    pub n: usize,
    pub topology: Topology,
    pub dac: DacSpec,
}

impl GateConfig {
    pub fn new(params: GnmParams, cb: u8, vref: f64, n: usize) -> Self {
        Self {
            params: ParamSource::Constant(params),
            constants: SurrogateConstants::default(),
            cb,
            vref,
            n,
            topology: Topology::BufferFeedback,
            dac: DacSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "decision iteration must be >= 1"));
        }
        if self.cb > 1 {
            return Err(Error::invalid(
                "cb",
                format!("control bit must be 0 or 1, got {}", self.cb),
            ));
        }
        // vref may sit outside the domain: such a comparator simply never (or always) fires
        if !self.vref.is_finite() {
            return Err(Error::invalid("vref", "must be finite"));
        }
        self.dac.validate()
    }

    fn build(&self, p: &GnmParams) -> Result<MapDescriptor> {
        MapDescriptor::gnm(*p, self.constants)
    }
}

/// Outputs of a gate over iterations `1..=upto_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateTrace {
    /// `values[input][k-1]` is the analog output at iteration `k`.
    pub values: Vec<Vec<f64>>,
    pub functions: Vec<FunctionId>,
    pub clipped: bool,
}

impl GateTrace {
    pub fn decision_values(&self, n: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[n - 1]).collect()
    }
}

pub fn trace_gate(config: &GateConfig, upto_n: usize) -> Result<GateTrace> {
    config.validate()?;
    if upto_n == 0 {
        return Err(Error::invalid("upto_n", "must be >= 1"));
    }
    let inputs = 1u32 << config.dac.data_inputs();
    let mut values = Vec::with_capacity(inputs as usize);
    let mut clipped = false;
    for input in 0..inputs {
        let orbit = match &config.params {
            ParamSource::Constant(p) => {
                let map = config.build(p)?;
                let x0 = config.dac.encode_within(input, config.cb, &map.domain())?;
                iterate(&map, &config.topology, x0, upto_n, 0)?
            }
            ParamSource::Scheduled(s) => {
                s.check_length(upto_n)?;
                let first = config.build(s.at(0))?;
                let x0 = config.dac.encode_within(input, config.cb, &first.domain())?;
                iterate_scheduled(|p| config.build(p), s, &config.topology, x0, upto_n)?
            }
        };
        clipped |= orbit.clipped;
        values.push(orbit.samples);
    }
    let functions = (0..upto_n)
        .map(|k| {
            let bits: Vec<u8> = values.iter().map(|v| comparator(v[k], config.vref)).collect();
            FunctionId::from_outputs(&bits)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GateTrace {
        values,
        functions,
        clipped,
    })
}

/// The function realised at each iteration `1..=upto_n`.
pub fn gate_function(config: &GateConfig, upto_n: usize) -> Result<Vec<FunctionId>> {
    Ok(trace_gate(config, upto_n)?.functions)
}

/// Smallest distance between a decision value and the threshold.
pub fn margin(values: &[f64], vref: f64) -> f64 {
    values.iter().map(|x| (x - vref).abs()).fold(f64::INFINITY, f64::min)
}

/// Decision margin at the configured iteration `n`.
pub fn noise_margin(config: &GateConfig) -> Result<f64> {
    let trace = trace_gate(config, config.n)?;
    Ok(margin(&trace.decision_values(config.n), config.vref))
}

/// One axis of a search grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec {
    Values(Vec<f64>),
    Linspace { from: f64, to: f64, steps: usize },
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            AxisSpec::Values(v) => v.clone(),
            AxisSpec::Linspace { from, to, steps } => match *steps {
                0 => Vec::new(),
                1 => vec![*from],
                s => (0..s)
                    .map(|i| {
                        if i + 1 == s {
                            *to
                        } else {
                            from + (to - from) * i as f64 / (s - 1) as f64
                        }
                    })
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchGrid {
    pub mu1: AxisSpec,
    pub mu2: AxisSpec,
    pub mu3: AxisSpec,
    pub cb: Vec<u8>,
    pub vref: AxisSpec,
    pub n_min: usize,
    pub n_max: usize,
    pub constants: SurrogateConstants,
    pub dac: DacSpec,
    pub topology: Topology,
    /// Keep configurations whose orbits saturate before the decision iteration.
    pub allow_clipped: bool,
    /// Refuse grids with more cells than this.
    pub cap: u128,
}

impl Default for SearchGrid {
    fn default() -> Self {
        Self {
            mu1: AxisSpec::Linspace {
                from: 0.90,
                to: 1.05,
                steps: 16,
            },
            mu2: AxisSpec::Values(vec![-0.3, 0.0, 0.3]),
            mu3: AxisSpec::Values(vec![-0.3, 0.0, 0.3]),
            cb: vec![0, 1],
            vref: AxisSpec::Values((5..=16).map(|i| i as f64 / 10.0).collect()),
            n_min: 1,
            n_max: 8,
            constants: SurrogateConstants::default(),
            dac: DacSpec::default(),
            topology: Topology::BufferFeedback,
            allow_clipped: false,
            cap: 10_000_000,
        }
    }
}

impl SearchGrid {
    pub fn size(&self) -> u128 {
        let n = (self.n_max + 1).saturating_sub(self.n_min) as u128;
        [
            self.mu1.values().len(),
            self.mu2.values().len(),
            self.mu3.values().len(),
            self.cb.len(),
            self.vref.values().len(),
        ]
        .iter()
        .fold(n, |acc, &l| acc * l as u128)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [
            ("mu1", &self.mu1),
            ("mu2", &self.mu2),
            ("mu3", &self.mu3),
            ("vref", &self.vref),
        ] {
            let v = axis.values();
            if v.is_empty() {
                return Err(Error::invalid(name, "grid axis is empty"));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(name, "grid axis has non-finite values"));
            }
        }
        if self.cb.is_empty() || self.cb.iter().any(|&c| c > 1) {
            return Err(Error::invalid(
                "cb",
                "control-bit levels must be a non-empty subset of {0, 1}",
            ));
        }
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::invalid(
                "n",
                format!("need 1 <= n_min <= n_max, got {}..={}", self.n_min, self.n_max),
            ));
        }
        self.dac.validate()?;
        let size = self.size();
        if size > self.cap {
            return Err(Error::GridTooLarge { size, cap: self.cap });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub config: GateConfig,
    pub function: FunctionId,
    pub margin: f64,
}

impl SearchResult {
    pub fn params(&self) -> GnmParams {
        match &self.config.params {
            ParamSource::Constant(p) => *p,
            ParamSource::Scheduled(s) => *s.at(0),
        }
    }
}

struct Block {
    params: GnmParams,
    cb: u8,
}

struct Candidate {
    index: u128,
    result: SearchResult,
}

/// Exhaustive search for configurations realising `target` with at least
/// `min_margin` volts of decision margin.
///
/// Cells are enumerated row-major over `mu1, mu2, mu3, cb, vref, n`; results are
/// ordered by descending margin, ties broken by enumeration order. Parameter
/// combinations that cannot be built (or whose DAC seeds leave the domain) are
/// skipped.
pub fn search_configurations(
    target: FunctionId,
    grid: &SearchGrid,
    min_margin: f64,
    limit: usize,
) -> Result<Vec<SearchResult>> {
    grid.validate()?;
    let inputs = 1u32 << grid.dac.data_inputs();
    if target.inputs() != grid.dac.data_inputs() {
        return Err(Error::Config(format!(
            "target has {} inputs but the DAC encodes {}",
            target.inputs(),
            grid.dac.data_inputs()
        )));
    }
    let vrefs = grid.vref.values();
    let ns: Vec<usize> = (grid.n_min..=grid.n_max).collect();
    let per_block = (vrefs.len() * ns.len()) as u128;

    let mut blocks = Vec::new();
    for mu1 in grid.mu1.values() {
        for mu2 in grid.mu2.values() {
            for mu3 in grid.mu3.values() {
                for &cb in &grid.cb {
                    blocks.push(Block {
                        params: GnmParams::new(mu1, mu2, mu3),
                        cb,
                    });
                }
            }
        }
    }

    let evaluate = |(bi, block): (usize, &Block)| -> Vec<Candidate> {
        let Ok(map) = MapDescriptor::gnm(block.params, grid.constants) else {
            return Vec::new();
        };
        if grid.topology.check_against(&map.domain()).is_err() {
            return Vec::new();
        }
        // values[input][k-1], first_clip[input] = first iteration with clipping
        let mut values = Vec::with_capacity(inputs as usize);
        let mut first_clip = Vec::with_capacity(inputs as usize);
        for input in 0..inputs {
            let Ok(x0) = grid.dac.encode_within(input, block.cb, &map.domain()) else {
                return Vec::new();
            };
            let mut driver = Driver::new(|_| &map, &grid.topology, x0);
            let mut trace = Vec::with_capacity(grid.n_max);
            let mut clip_at = usize::MAX;
            for k in 1..=grid.n_max {
                let step = driver.step();
                if step.clipped && clip_at == usize::MAX {
                    clip_at = k;
                }
                trace.push(step.output);
            }
            values.push(trace);
            first_clip.push(clip_at);
        }
        let earliest_clip = first_clip.iter().copied().min().unwrap_or(usize::MAX);

        let mut found = Vec::new();
        let mut bits = vec![0u8; inputs as usize];
        let mut decision = vec![0.0; inputs as usize];
        for (vi, &vref) in vrefs.iter().enumerate() {
            for (ni, &n) in ns.iter().enumerate() {
                if !grid.allow_clipped && earliest_clip <= n {
                    continue;
                }
                for i in 0..inputs as usize {
                    decision[i] = values[i][n - 1];
                    bits[i] = comparator(decision[i], vref);
                }
                let Ok(function) = FunctionId::from_outputs(&bits) else {
                    continue;
                };
                if function != target {
                    continue;
                }
                let m = margin(&decision, vref);
                if m < min_margin {
                    continue;
                }
                found.push(Candidate {
                    index: bi as u128 * per_block + (vi * ns.len() + ni) as u128,
                    result: SearchResult {
                        config: GateConfig {
                            params: ParamSource::Constant(block.params),
                            constants: grid.constants,
                            cb: block.cb,
                            vref,
                            n,
                            topology: grid.topology.clone(),
                            dac: grid.dac,
                        },
                        function,
                        margin: m,
                    },
                });
            }
        }
        found
    };

    let mut candidates: Vec<Candidate> = blocks.par_iter().enumerate().flat_map_iter(evaluate).collect();
    candidates.sort_by(|a, b| b.result.margin.total_cmp(&a.result.margin).then(a.index.cmp(&b.index)));
    candidates.truncate(limit);
    Ok(candidates.into_iter().map(|c| c.result).collect())
}
