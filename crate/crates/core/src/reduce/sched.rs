//! Seeded random scheduler: picks one enabled reduction at a time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::explore::{Bounds, Configuration};
use super::step::{step_config, Derivation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum StopReason {
    Deadlock,
    StepLimit,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunStep {
    pub rule: String,
    pub derivation: Derivation,
    pub config: Configuration,
}

#[derive(Clone, Debug, Serialize)]
pub struct Run {
    pub seed: u64,
    pub initial: Configuration,
    pub steps: Vec<RunStep>,
    pub stopped: StopReason,
}

/// Same seed, same run: successors are enumerated in a fixed order and the
/// generator is a portable ChaCha stream.
pub fn run_scheduler(init: &Configuration, seed: u64, max_steps: usize, raw: bool) -> Run {
    let b = Bounds {
        raw,
        ..Bounds::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = b.normalise(init.clone());
    let initial = cur.clone();
    let mut steps = Vec::new();
    loop {
        if steps.len() >= max_steps {
            return Run {
                seed,
                initial,
                steps,
                stopped: StopReason::StepLimit,
            };
        }
        let mut succ = step_config(&cur.process, &cur.state);
        if succ.is_empty() {
            return Run {
                seed,
                initial,
                steps,
                stopped: StopReason::Deadlock,
            };
        }
        let k = rng.gen_range(0..succ.len());
        let st = succ.swap_remove(k);
        cur = b.normalise(Configuration::new(st.process, st.state));
        steps.push(RunStep {
            rule: st.derivation.rule().name().to_string(),
            derivation: st.derivation,
            config: cur.clone(),
        });
    }
}

impl Run {
    pub fn final_config(&self) -> &Configuration {
        self.steps.last().map(|s| &s.config).unwrap_or(&self.initial)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("seed {}\n  {}\n", self.seed, self.initial);
        for st in &self.steps {
            s.push_str(&format!("-{}-> {}\n", st.derivation, st.config));
        }
        s.push_str(&format!("stopped: {:?}\n", self.stopped));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_process;

    #[test]
    fn deterministic_per_seed() {
        let c = Configuration::initial(parse_process("a! | b! | a?.c! | b?.d!").unwrap());
        let r1 = serde_json::to_string(&run_scheduler(&c, 7, 50, false)).unwrap();
        let r2 = serde_json::to_string(&run_scheduler(&c, 7, 50, false)).unwrap();
        assert_eq!(r1, r2);
        let r = run_scheduler(&c, 7, 50, false);
        assert_eq!(r.stopped, StopReason::Deadlock);
        assert_eq!(r.final_config().state.to_string(), "{c,d}");
    }
}
