use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Strand in which a read is traversed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Forward,
    Reverse,
}

impl Orientation {
    pub fn flip(self) -> Self {
        match self {
            Orientation::Forward => Orientation::Reverse,
            Orientation::Reverse => Orientation::Forward,
        }
    }

    pub fn is_reverse(self) -> bool {
        self == Orientation::Reverse
    }

    pub fn symbol(self) -> char {
        match self {
            Orientation::Forward => '+',
            Orientation::Reverse => '-',
        }
    }
}

/// Bidirected edge type, encoded by the orientations of source and
/// destination when the source read precedes the destination read.
///
/// | code | variant  | layout            |
/// |------|----------|-------------------|
/// | 0    | Forward  | `u+` then `v+`    |
/// | 1    | BothIn   | `u+` then `v-` (suffixes meet) |
/// | 2    | BothOut  | `u-` then `v+` (prefixes meet) |
/// | 3    | Backward | `u-` then `v-`    |
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    BothIn,
    BothOut,
    Backward,
}

impl Direction {
    pub fn from_orientations(src: Orientation, dst: Orientation) -> Self {
        match (src, dst) {
            (Orientation::Forward, Orientation::Forward) => Direction::Forward,
            (Orientation::Forward, Orientation::Reverse) => Direction::BothIn,
            (Orientation::Reverse, Orientation::Forward) => Direction::BothOut,
            (Orientation::Reverse, Orientation::Reverse) => Direction::Backward,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => Direction::Forward,
            1 => Direction::BothIn,
            2 => Direction::BothOut,
            3 => Direction::Backward,
            _ => return None,
        })
    }

    pub fn src(self) -> Orientation {
        match self {
            Direction::Forward | Direction::BothIn => Orientation::Forward,
            Direction::BothOut | Direction::Backward => Orientation::Reverse,
        }
    }

    pub fn dst(self) -> Orientation {
        match self {
            Direction::Forward | Direction::BothOut => Orientation::Forward,
            Direction::BothIn | Direction::Backward => Orientation::Reverse,
        }
    }

    /// The same overlap seen from the destination: the whole layout is
    /// reverse-complemented, so `(o_u, o_v)` becomes `(!o_v, !o_u)`.
    pub fn mirror(self) -> Self {
        Direction::from_orientations(self.dst().flip(), self.src().flip())
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::BothIn => "both-in",
            Direction::BothOut => "both-out",
            Direction::Backward => "backward",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forward" | "FF" | "0" => Ok(Direction::Forward),
            "both-in" | "FR" | "1" => Ok(Direction::BothIn),
            "both-out" | "RF" | "2" => Ok(Direction::BothOut),
            "backward" | "RR" | "3" => Ok(Direction::Backward),
            other => Err(format!("unknown edge direction {other:?}")),
        }
    }
}

/// Payload of one string-graph nonzero `(u, v)`.
///
/// `pre` is the index in `l_u` of the last base emitted before switching to
/// `l_v`; `post` is the index in `l_v` of the first base emitted from it. Both
/// are stored-strand indices, read in the walk direction given by
/// `direction`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeLabel {
    pub direction: Direction,
    /// Bases of `l_v` beyond the overlap (the edge weight).
    pub overhang: u32,
    /// Bases of `l_u` before the overlap; the overhang of the mirrored edge.
    pub src_overhang: u32,
    pub pre: u32,
    pub post: u32,
}

impl EdgeLabel {
    /// Checks the index bounds against the two read lengths.
    pub fn is_valid_for(&self, len_u: usize, len_v: usize) -> bool {
        (self.pre as usize) < len_u
            && (self.post as usize) < len_v
            && (self.overhang as usize) < len_v
            && (self.src_overhang as usize) < len_u
    }
}

/// Payload transformation applied when a nonzero `(u, v)` is moved to `(v, u)`.
pub trait Mirror {
    fn mirror(&self) -> Self;
}

impl Mirror for EdgeLabel {
    fn mirror(&self) -> Self {
        EdgeLabel {
            direction: self.direction.mirror(),
            overhang: self.src_overhang,
            src_overhang: self.overhang,
            pre: self.post,
            post: self.pre,
        }
    }
}

macro_rules! identity_mirror {
    ($($t:ty),*) => {
        $(impl Mirror for $t {
            fn mirror(&self) -> Self {
                *self
            }
        })*
    };
}

identity_mirror!((), bool, u8, u32, u64, usize);
