//! One environment interaction, as archived by the storage primitives.

/// An action in canonical layout: discrete choices as 64-bit integers,
/// continuous actions as row-major f32 vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Discrete(i64),
    Continuous(Vec<f32>),
}

impl Action {
    /// The discrete index, if this is a discrete action.
    pub fn index(&self) -> Option<i64> {
        match self {
            Action::Discrete(a) => Some(*a),
            Action::Continuous(_) => None,
        }
    }
}

/// One step of experience with separate extrinsic and intrinsic reward
/// channels. `reward_int` stays 0 when no intrinsic module is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f32>,
    pub action: Action,
    pub reward_ext: f32,
    pub reward_int: f32,
    pub terminated: bool,
    pub truncated: bool,
    pub next_obs: Vec<f32>,
}

impl Transition {
    /// Combined reward seen by value targets.
    pub fn reward_total(&self) -> f32 {
        self.reward_ext + self.reward_int
    }

    /// Episode boundary (either termination or truncation).
    pub fn episode_end(&self) -> bool {
        self.terminated || self.truncated
    }
}
