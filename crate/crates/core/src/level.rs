use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A supported Fricke level `p`, one of 1, 2, 3, 5, 7.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Level(u32);

impl Level {
    pub const ONE: Level = Level(1);
    pub const ALL: [Level; 5] = [Level(1), Level(2), Level(3), Level(5), Level(7)];

    pub fn new(p: u32) -> Result<Level> {
        match p {
            1 | 2 | 3 | 5 | 7 => Ok(Level(p)),
            _ => Err(Error::UnsupportedLevel(p)),
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Number of lower boundary arcs of the standard fundamental domain.
    pub fn arc_count(self) -> u8 {
        if self.0 >= 5 {
            2
        } else {
            1
        }
    }

    pub fn arcs(self) -> impl Iterator<Item = u8> {
        1..=self.arc_count()
    }
}

impl TryFrom<u32> for Level {
    type Error = Error;
    fn try_from(p: u32) -> Result<Level> {
        Level::new(p)
    }
}

impl From<Level> for u32 {
    fn from(l: Level) -> u32 {
        l.0
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_five_levels() {
        for p in 0..12 {
            assert_eq!(Level::new(p).is_ok(), [1, 2, 3, 5, 7].contains(&p), "p = {p}");
        }
        assert_eq!(Level::new(5).unwrap().arc_count(), 2);
        assert_eq!(Level::new(3).unwrap().arc_count(), 1);
    }
}
