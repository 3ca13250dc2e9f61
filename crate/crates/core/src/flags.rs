use std::fmt;

bitflags::bitflags! {
    /// Non-fatal conditions raised while planning or simulating. A controller
    /// never aborts mid-loop; it clamps and sets one of these instead.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
    pub struct Flags: u8 {
        /// A model was evaluated outside its validity domain and the input was clamped.
        const DOMAIN = 1 << 0;
        /// Residual force target exceeded the bubble's force ceiling.
        const RESIDUAL = 1 << 1;
        /// Poke had no sustain sample; its constant pressure fell back to 0 kPa.
        const EMPTY_SUSTAIN = 1 << 2;
        /// Platform command hit the hardware travel limit.
        const TRAVEL = 1 << 3;
        /// Bubble command clamped to [0, P_max].
        const PRESSURE = 1 << 4;
        /// Bubble command still inside the pneumatic dead time.
        const LATENCY = 1 << 5;
    }
}

const NAMES: [(Flags, &str); 6] = [
    (Flags::DOMAIN, "domain"),
    (Flags::RESIDUAL, "residual"),
    (Flags::EMPTY_SUSTAIN, "empty_sustain"),
    (Flags::TRAVEL, "travel"),
    (Flags::PRESSURE, "pressure"),
    (Flags::LATENCY, "latency"),
];

impl fmt::Display for Flags {
    /// `-` when empty, otherwise flag names joined with `|`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("-");
        }
        let mut first = true;
        for (flag, name) in NAMES {
            if self.contains(flag) {
                if !first {
                    f.write_str("|")?;
                }
                f.write_str(name)?;
                first = false;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Flags {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "-" || s.is_empty() {
            return Ok(Flags::empty());
        }
        let mut out = Flags::empty();
        for part in s.split('|') {
            let (flag, _) = NAMES
                .iter()
                .find(|(_, n)| *n == part)
                .ok_or_else(|| format!("unknown flag {part:?}"))?;
            out |= *flag;
        }
        Ok(out)
    }
}
