//! Iterating a map under the two feedback topologies.
//!
//! With buffer feedback the forward output is fed straight back. With map
//! feedback the forward output `y_k = fw(x_k)` is observed and `x_{k+1} = fb(y_k)`
//! is reinjected.
//!
//! The state is carried in the unit coordinate of the map that produced it and
//! only converted through volts when the next map has a different domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{GnmParams, Interval, MapDescriptor, DOMAIN_TOLERANCE};

#[derive(Debug, Clone, PartialEq)]
pub enum Topology {
    BufferFeedback,
    MapFeedback(MapDescriptor),
}

impl Topology {
    pub fn feedback_map(&self) -> Option<&MapDescriptor> {
        match self {
            Topology::BufferFeedback => None,
            Topology::MapFeedback(fb) => Some(fb),
        }
    }

    /// The feedback map's domain has to contain every forward output.
    pub fn check_against(&self, fw_domain: &Interval) -> Result<()> {
        if let Topology::MapFeedback(fb) = self {
            if !fb.domain().covers(fw_domain) {
                return Err(Error::Config(format!(
                    "feedback map domain [{}, {}] does not contain forward range [{}, {}]",
                    fb.domain().lo(),
                    fb.domain().hi(),
                    fw_domain.lo(),
                    fw_domain.hi()
                )));
            }
        }
        Ok(())
    }
}

/// Per-iteration parameter levels: either one constant entry or exactly `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub entries: Vec<GnmParams>,
}

impl Schedule {
    pub fn constant(p: GnmParams) -> Self {
        Self { entries: vec![p] }
    }

    pub fn per_iteration(entries: Vec<GnmParams>) -> Self {
        Self { entries }
    }

    pub fn check_length(&self, n: usize) -> Result<()> {
        let len = self.entries.len();
        if len == 1 || len == n {
            Ok(())
        } else {
            Err(Error::Config(format!("schedule has {len} entries; expected 1 or {n}")))
        }
    }

    pub fn at(&self, k: usize) -> &GnmParams {
        if self.entries.len() == 1 {
            &self.entries[0]
        } else {
            &self.entries[k]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub seed: f64,
    pub transient_count: usize,
    /// Observed outputs after the transient, in volts.
    pub samples: Vec<f64>,
    /// Some input or output left its domain and was clipped.
    pub clipped: bool,
}

#[derive(Debug, Clone, Copy)]
struct State {
    u: f64,
    domain: Interval,
}

impl State {
    /// Expresses the state in `map`'s unit coordinate, clipping into its domain.
    fn enter(&self, map: &MapDescriptor) -> (f64, bool) {
        let domain = map.domain();
        if domain == self.domain {
            return (self.u, false);
        }
        let x = self.domain.from_unit(self.u);
        let clipped = !domain.contains(x, DOMAIN_TOLERANCE);
        (domain.to_unit(domain.clamp(x)), clipped)
    }
}

/// One forward (and optional feedback) pass.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Step {
    /// Observed forward output in volts.
    pub output: f64,
    /// Forward input in the forward map's unit coordinate.
    pub fw_in: f64,
    /// Feedback input in the feedback map's unit coordinate.
    pub fb_in: Option<f64>,
    pub clipped: bool,
}

/// Drives a sequence of forward maps through a topology.
pub(crate) struct Driver<'a, F> {
    maps: F,
    feedback: Option<&'a MapDescriptor>,
    state: State,
    k: usize,
}

impl<'a, F> Driver<'a, F>
where
    F: FnMut(usize) -> &'a MapDescriptor,
{
    /// `x0` must already be known to lie in the first map's domain.
    pub fn new(mut maps: F, topo: &'a Topology, x0: f64) -> Self {
        let domain = maps(0).domain();
        let u = domain.to_unit(domain.clamp(x0));
        Self {
            maps,
            feedback: topo.feedback_map(),
            state: State { u, domain },
            k: 0,
        }
    }

    pub fn step(&mut self) -> Step {
        let fw = (self.maps)(self.k);
        self.k += 1;
        let (fw_in, entered_clipped) = self.state.enter(fw);
        let out = fw.eval_unit(fw_in);
        let fw_domain = fw.domain();
        let output = fw_domain.from_unit(out.value);
        let mut clipped = entered_clipped || out.clipped;
        let mut fb_in = None;
        self.state = State {
            u: out.value,
            domain: fw_domain,
        };
        if let Some(fb) = self.feedback {
            let (v, c) = self.state.enter(fb);
            let back = fb.eval_unit(v);
            clipped |= c || back.clipped;
            fb_in = Some(v);
            self.state = State {
                u: back.value,
                domain: fb.domain(),
            };
        }
        Step {
            output,
            fw_in,
            fb_in,
            clipped,
        }
    }
}

pub(crate) fn check_seed(map: &MapDescriptor, x0: f64) -> Result<()> {
    if x0.is_finite() && map.domain().contains(x0, DOMAIN_TOLERANCE) {
        Ok(())
    } else {
        Err(Error::InputOutOfRange {
            x: x0,
            lo: map.domain().lo(),
            hi: map.domain().hi(),
        })
    }
}

fn run<'a>(
    maps: impl FnMut(usize) -> &'a MapDescriptor,
    topo: &'a Topology,
    x0: f64,
    n: usize,
    transient: usize,
) -> Orbit {
    let mut driver = Driver::new(maps, topo, x0);
    let mut samples = Vec::with_capacity(n - transient);
    let mut clipped = false;
    for k in 0..n {
        let step = driver.step();
        clipped |= step.clipped;
        if k >= transient {
            samples.push(step.output);
        }
    }
    Orbit {
        seed: x0,
        transient_count: transient,
        samples,
        clipped,
    }
}

/// Runs `n` iterations from `x0` and keeps the outputs after `transient`.
pub fn iterate(fw: &MapDescriptor, topo: &Topology, x0: f64, n: usize, transient: usize) -> Result<Orbit> {
    if n <= transient {
        return Err(Error::Config(format!("n ({n}) must exceed transient ({transient})")));
    }
    check_seed(fw, x0)?;
    topo.check_against(&fw.domain())?;
    Ok(run(|_| fw, topo, x0, n, transient))
}

/// Like [`iterate`] (with no transient), but iteration `k` uses the forward map
/// built from `sched.at(k)`.
pub fn iterate_scheduled<B>(build: B, sched: &Schedule, topo: &Topology, x0: f64, n: usize) -> Result<Orbit>
where
    B: Fn(&GnmParams) -> Result<MapDescriptor>,
{
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    sched.check_length(n)?;
    let maps = sched.entries.iter().map(&build).collect::<Result<Vec<_>>>()?;
    check_seed(&maps[0], x0)?;
    for m in &maps {
        topo.check_against(&m.domain())?;
    }
    let pick = |k: usize| if maps.len() == 1 { &maps[0] } else { &maps[k] };
    Ok(run(pick, topo, x0, n, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::SurrogateConstants;
    use crate::tabulated::TabulatedCurve;

    fn gnm(mu1: f64) -> MapDescriptor {
        MapDescriptor::gnm(GnmParams::new(mu1, 0.0, 0.0), SurrogateConstants::default()).unwrap()
    }

    fn gnm_builder(p: &GnmParams) -> Result<MapDescriptor> {
        MapDescriptor::gnm(*p, SurrogateConstants::default())
    }

    #[test]
    fn logistic_converges_to_fixed_point() {
        let m = MapDescriptor::logistic(2.0).unwrap();
        let o = iterate(&m, &Topology::BufferFeedback, 0.3, 100, 99).unwrap();
        assert_eq!(o.samples.len(), 1);
        assert!((o.samples[0] - 0.5).abs() < 1e-9);
        assert!(!o.clipped);
    }

    #[test]
    fn gnm_orbit_is_scaled_logistic_orbit() {
        let m = gnm(1.0);
        let o = iterate(&m, &Topology::BufferFeedback, 1.0, 4, 0).unwrap();
        // independent recurrence in the logistic coordinate
        let r = 1e6 * 10e-6 / 2.63;
        let mut u = 1.0 / 2.63;
        for &x in &o.samples {
            u = r * u * (1.0 - u);
            assert!((x - 2.63 * u).abs() < 1e-12, "{x} vs {}", 2.63 * u);
        }
    }

    #[test]
    fn identity_feedback_reduces_to_buffer() {
        let fw = gnm(0.9);
        let ident = MapDescriptor::tabulated(TabulatedCurve::sample(0.0, 2.63, 32, |x| x).unwrap());
        let a = iterate(&fw, &Topology::BufferFeedback, 0.7, 400, 0).unwrap();
        let b = iterate(&fw, &Topology::MapFeedback(ident), 0.7, 400, 0).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn transient_is_a_suffix() {
        let m = gnm(1.03);
        let full = iterate(&m, &Topology::BufferFeedback, 0.4, 50, 0).unwrap();
        let tail = iterate(&m, &Topology::BufferFeedback, 0.4, 50, 20).unwrap();
        assert_eq!(&full.samples[20..], &tail.samples[..]);
    }

    #[test]
    fn bad_arguments() {
        let m = gnm(1.0);
        assert!(iterate(&m, &Topology::BufferFeedback, 0.4, 10, 10).is_err());
        assert!(matches!(
            iterate(&m, &Topology::BufferFeedback, 3.0, 10, 0),
            Err(Error::InputOutOfRange { .. })
        ));
        let narrow = MapDescriptor::logistic(3.0).unwrap();
        assert!(matches!(
            iterate(&m, &Topology::MapFeedback(narrow), 0.4, 10, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn overdriven_map_flags_clipping() {
        let m = MapDescriptor::logistic(4.2).unwrap();
        let o = iterate(&m, &Topology::BufferFeedback, 0.5, 3, 0).unwrap();
        assert!(o.clipped);
        assert!(o.samples.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn constant_schedule_matches_iterate() {
        let p = GnmParams::new(0.97, 0.0, 0.0);
        let a = iterate(&gnm(0.97), &Topology::BufferFeedback, 0.8, 30, 0).unwrap();
        let b = iterate_scheduled(gnm_builder, &Schedule::constant(p), &Topology::BufferFeedback, 0.8, 30).unwrap();
        assert_eq!(a, b);
        let c = iterate_scheduled(
            gnm_builder,
            &Schedule::per_iteration(vec![p; 30]),
            &Topology::BufferFeedback,
            0.8,
            30,
        )
        .unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn repeated_entries_equal_constant_schedule() {
        let p = GnmParams::new(0.7, 0.0, 0.0);
        let a = iterate_scheduled(
            gnm_builder,
            &Schedule::per_iteration(vec![p, p]),
            &Topology::BufferFeedback,
            1.0,
            2,
        )
        .unwrap();
        let b = iterate_scheduled(gnm_builder, &Schedule::constant(p), &Topology::BufferFeedback, 1.0, 2).unwrap();
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn schedule_matches_hand_composition() {
        let s = Schedule::per_iteration(vec![GnmParams::new(0.9, 0.0, 0.0), GnmParams::new(1.0, 0.0, 0.0)]);
        let o = iterate_scheduled(gnm_builder, &s, &Topology::BufferFeedback, 1.0, 2).unwrap();
        let x1 = gnm(0.9).eval_map(1.0).unwrap();
        let x2 = gnm(1.0).eval_map(x1).unwrap();
        assert!((o.samples[0] - x1).abs() < 1e-12);
        assert!((o.samples[1] - x2).abs() < 1e-12);
    }

    #[test]
    fn schedule_switching_domains_clips_instead_of_failing() {
        let s = Schedule::per_iteration(vec![GnmParams::new(1.05, 0.3, 0.0), GnmParams::new(1.0, -0.3, 0.0)]);
        let o = iterate_scheduled(gnm_builder, &s, &Topology::BufferFeedback, 1.39, 2).unwrap();
        // 1.39 V is near the peak of the first map, whose output exceeds the second map's cutoff
        assert!(o.clipped);
        assert!(o.samples[1] <= 2.48 + 1e-12);
    }

    #[test]
    fn schedule_length_mismatch() {
        let s = Schedule::per_iteration(vec![GnmParams::default(); 3]);
        assert!(matches!(
            iterate_scheduled(gnm_builder, &s, &Topology::BufferFeedback, 1.0, 5),
            Err(Error::Config(_))
        ));
    }
}
