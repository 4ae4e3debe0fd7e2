//! Exception-list fixtures: sorted integer lists shipped as plain text and
//! pinned by content hash. Pipelines are validated against these rather than
//! trusted to regenerate them.

use std::collections::BTreeSet;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// One fixture: the name of its data file and the pinned sha256 of the file
/// contents (sorted decimal values, one per line, trailing newline).
pub struct Fixture {
    pub name: &'static str,
    pub sha256: &'static str,
    text: &'static str,
}

/// 146 possible cubic line-problem exceptions surviving the improved sieve.
pub const CUBIC_146: Fixture = Fixture {
    name: "cubic_possible_146.txt",
    sha256: "982d0caaba40d5b1187d701e748d77a34c0ba995bce1bc515ec1ae0b6f2e2fa4",
    text: include_str!("../../../data/cubic_possible_146.txt"),
};

/// 82 cubic exceptions surviving the refined k=2 / k=6 criteria.
pub const CUBIC_82: Fixture = Fixture {
    name: "cubic_possible_82.txt",
    sha256: "98e6f95114b36b98b9d52384e93366304390f810ad2bf667458088d84fd1642a",
    text: include_str!("../../../data/cubic_possible_82.txt"),
};

/// 1514 possible quartic exceptions (line and translate problems).
pub const QUARTIC_E4: Fixture = Fixture {
    name: "quartic_e4.txt",
    sha256: "92480b5b9f5f58465a3b785b4e875278517e7e8d17f2ded01d1a66d9636b430f",
    text: include_str!("../../../data/quartic_e4.txt"),
};

/// 21 genuine quartic line-problem exceptions.
pub const QUARTIC_GL: Fixture = Fixture {
    name: "quartic_gl.txt",
    sha256: "fd634fad9719349b1fa4c7892bfb7978786d626b580dc06c9facf099bedd9f71",
    text: include_str!("../../../data/quartic_gl.txt"),
};

/// 13 genuine quartic translate-problem exceptions.
pub const QUARTIC_GT: Fixture = Fixture {
    name: "quartic_gt.txt",
    sha256: "1ffd314de3fb25da6996aed62f7addacf84e474669399a4145762b544a68ad57",
    text: include_str!("../../../data/quartic_gt.txt"),
};

/// 9 genuine cubic line-problem exceptions.
pub const CUBIC_EXCEPTIONS: [u64; 9] = [3, 4, 5, 7, 9, 11, 13, 31, 37];

impl Fixture {
    /// Parse the embedded copy, verifying the pinned hash.
    pub fn values(&self) -> Result<BTreeSet<u64>> {
        Self::parse(self.name, self.text, self.sha256)
    }

    /// Read the fixture from a data directory instead of the embedded copy;
    /// the pinned hash still applies.
    pub fn values_from_dir(&self, dir: &Path) -> Result<BTreeSet<u64>> {
        let text = std::fs::read_to_string(dir.join(self.name))?;
        Self::parse(self.name, &text, self.sha256)
    }

    fn parse(name: &str, text: &str, expected_sha: &str) -> Result<BTreeSet<u64>> {
        let digest = hex(&Sha256::digest(text.as_bytes()));
        if digest != expected_sha {
            return Err(Error::Fixture {
                name: name.to_string(),
                reason: format!("content hash {digest} does not match pinned {expected_sha}"),
            });
        }
        let mut out = BTreeSet::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: u64 = line.parse().map_err(|_| Error::Fixture {
                name: name.to_string(),
                reason: format!("bad line {line:?}"),
            })?;
            out.insert(v);
        }
        Ok(out)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
