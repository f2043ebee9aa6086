use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::chain::{MarkovChain, Start};
use crate::rng::StreamRng;

/// How the sequence of component indices is generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "k")]
pub enum SamplerMode {
    /// The raw chain trajectory.
    Markov,
    /// Independent draws from the stationary distribution.
    Iid,
    /// Concatenated uniform random permutations of `0..n`.
    Reshuffle,
    /// Every `k`-th state of the chain trajectory.
    WaitForMix(u64),
}

/// Index stream for one run. Each emitted index costs `hops()` token moves.
pub struct Sampler<'a> {
    mode: SamplerMode,
    chain: &'a MarkovChain,
    rng: StreamRng,
    current: usize,
    perm: Vec<usize>,
    pos: usize,
}

impl<'a> Sampler<'a> {
    pub fn new(
        mode: SamplerMode,
        chain: &'a MarkovChain,
        start: Start,
        mut rng: StreamRng,
    ) -> Self {
        let n = chain.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let current = match mode {
            SamplerMode::Markov | SamplerMode::WaitForMix(_) => chain.draw_start(start, &mut rng),
            SamplerMode::Iid => chain.draw_stationary(&mut rng),
            SamplerMode::Reshuffle => {
                perm.shuffle(&mut rng);
                perm[0]
            }
        };
        Sampler {
            mode,
            chain,
            rng,
            current,
            perm,
            pos: 0,
        }
    }

    pub fn mode(&self) -> SamplerMode {
        self.mode
    }

    /// The index for the current step.
    pub fn current(&self) -> usize {
        self.current
    }

    /// Token moves paid per emitted index.
    pub fn hops(&self) -> u64 {
        match self.mode {
            SamplerMode::WaitForMix(k) => k.max(1),
            _ => 1,
        }
    }

    /// Moves to the next index and returns it.
    pub fn advance(&mut self) -> usize {
        self.current = match self.mode {
            SamplerMode::Markov => self.chain.step(self.current, &mut self.rng),
            SamplerMode::WaitForMix(k) => {
                let mut v = self.current;
                for _ in 0..k.max(1) {
                    v = self.chain.step(v, &mut self.rng);
                }
                v
            }
            SamplerMode::Iid => self.chain.draw_stationary(&mut self.rng),
            SamplerMode::Reshuffle => {
                self.pos += 1;
                if self.pos == self.perm.len() {
                    self.perm.shuffle(&mut self.rng);
                    self.pos = 0;
                }
                self.perm[self.pos]
            }
        };
        self.current
    }

    /// The first `len` indices, starting with the current one.
    pub fn take(&mut self, len: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(len);
        if len > 0 {
            out.push(self.current);
        }
        while out.len() < len {
            out.push(self.advance());
        }
        out
    }
}
