//! Piecewise-constant (optionally complex) potential landscapes.
//!
//! A [`PotentialProfile`] is an ordered run of contiguous segments between
//! two flat asymptotic leads. Units throughout the crate are ħ = 1, m = 1/2,
//! so a carrier of energy `E` in a region of potential `V` has wavevector
//! `sqrt(E - V)` and velocity `2k`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

/// Length of the domain used for a profile built from an empty segment list.
pub const DEFAULT_DOMAIN_LENGTH: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("segment {index} overlaps its predecessor ({start} < {prev_end})")]
    OverlappingSegments {
        index: usize,
        start: f64,
        prev_end: f64,
    },
    #[error("gap between segment {index} and its predecessor: [{prev_end}, {start}] must be listed explicitly")]
    NonContiguousSegments {
        index: usize,
        start: f64,
        prev_end: f64,
    },
    #[error("empty segment list with distinct asymptotic levels ({v_left} != {v_right})")]
    EmptyProfile { v_left: f64, v_right: f64 },
    #[error("segment {index} has y_start >= y_end ({start} >= {end})")]
    DegenerateSegment { index: usize, start: f64, end: f64 },
    #[error("non-finite value in segment {index}")]
    NonFinite { index: usize },
    #[error("optical potentials of both signs present; flag the profile as a dephasing pair to allow this")]
    MixedOpticalSigns,
    #[error("window [{lo}, {hi}] is not inside the domain [{domain_lo}, {domain_hi}]")]
    WindowOutOfDomain {
        lo: f64,
        hi: f64,
        domain_lo: f64,
        domain_hi: f64,
    },
    #[error("invalid window: y_lo = {lo} must be < y_hi = {hi}")]
    InvalidWindow { lo: f64, hi: f64 },
    #[error("profile text, line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// One segment of constant potential on `[start, end)`.
///
/// The value is held as the construction value plus an accumulated
/// perturbation, so that a perturbation followed by its negation restores
/// the original value bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    base: Complex64,
    offset: Complex64,
}

impl Segment {
    pub fn new(start: f64, end: f64, value: Complex64) -> Self {
        Segment {
            start,
            end,
            base: value,
            offset: Complex64::new(0.0, 0.0),
        }
    }

    pub fn value(&self) -> Complex64 {
        self.base + self.offset
    }

    pub fn width(&self) -> f64 {
        self.end - self.start
    }
}

impl From<(f64, f64, Complex64)> for Segment {
    fn from((start, end, value): (f64, f64, Complex64)) -> Self {
        Segment::new(start, end, value)
    }
}

impl From<(f64, f64, f64)> for Segment {
    fn from((start, end, value): (f64, f64, f64)) -> Self {
        Segment::new(start, end, Complex64::new(value, 0.0))
    }
}

/// The interval `[y_lo, y_hi]` on which a local probe acts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Window {
    pub fn new(y_lo: f64, y_hi: f64) -> Result<Self, ProfileError> {
        if !(y_lo.is_finite() && y_hi.is_finite()) || y_lo >= y_hi {
            return Err(ProfileError::InvalidWindow { lo: y_lo, hi: y_hi });
        }
        Ok(Window { y_lo, y_hi })
    }

    /// Window of the given width centred on `y`.
    pub fn centered(y: f64, width: f64) -> Result<Self, ProfileError> {
        Window::new(y - 0.5 * width, y + 0.5 * width)
    }

    pub fn width(&self) -> f64 {
        self.y_hi - self.y_lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.y_lo + self.y_hi)
    }

    /// Splits `[lo, hi]` into `count` equal windows.
    pub fn tiling(lo: f64, hi: f64, count: usize) -> Result<Vec<Window>, ProfileError> {
        if count == 0 {
            return Err(ProfileError::InvalidWindow { lo, hi });
        }
        let step = (hi - lo) / count as f64;
        (0..count)
            .map(|i| {
                let a = lo + step * i as f64;
                let b = if i + 1 == count { hi } else { lo + step * (i + 1) as f64 };
                Window::new(a, b)
            })
            .collect()
    }
}

/// Piecewise-constant potential `V(y)` with flat leads.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    segments: Vec<Segment>,
    v_left: f64,
    v_right: f64,
    dephasing_pair: bool,
}

/// Sign class of the imaginary parts; mixed classes need an explicit flag.
fn check_optical_signs(segments: &[Segment]) -> Result<(), ProfileError> {
    let absorbing = segments.iter().any(|s| s.value().im < 0.0);
    let emitting = segments.iter().any(|s| s.value().im > 0.0);
    if absorbing && emitting {
        Err(ProfileError::MixedOpticalSigns)
    } else {
        Ok(())
    }
}

impl PotentialProfile {
    /// Validates a segment list and builds the profile.
    pub fn new<S: Into<Segment>>(
        segments: impl IntoIterator<Item = S>,
        v_left: f64,
        v_right: f64,
    ) -> Result<Self, ProfileError> {
        Self::build(segments.into_iter().map(Into::into).collect(), v_left, v_right, false)
    }

    /// As [`PotentialProfile::new`], but allows absorbing and emitting
    /// segments to coexist (dephasing pair).
    pub fn new_dephasing_pair<S: Into<Segment>>(
        segments: impl IntoIterator<Item = S>,
        v_left: f64,
        v_right: f64,
    ) -> Result<Self, ProfileError> {
        Self::build(segments.into_iter().map(Into::into).collect(), v_left, v_right, true)
    }

    fn build(
        mut segments: Vec<Segment>,
        v_left: f64,
        v_right: f64,
        dephasing_pair: bool,
    ) -> Result<Self, ProfileError> {
        if !(v_left.is_finite() && v_right.is_finite()) {
            return Err(ProfileError::NonFinite { index: 0 });
        }
        if segments.is_empty() {
            if v_left != v_right {
                return Err(ProfileError::EmptyProfile { v_left, v_right });
            }
            segments.push(Segment::new(
                0.0,
                DEFAULT_DOMAIN_LENGTH,
                Complex64::new(v_left, 0.0),
            ));
        }
        for (index, seg) in segments.iter().enumerate() {
            let v = seg.value();
            if !(seg.start.is_finite() && seg.end.is_finite() && v.re.is_finite() && v.im.is_finite()) {
                return Err(ProfileError::NonFinite { index });
            }
            if seg.start >= seg.end {
                return Err(ProfileError::DegenerateSegment {
                    index,
                    start: seg.start,
                    end: seg.end,
                });
            }
            if index > 0 {
                let prev_end = segments[index - 1].end;
                if seg.start < prev_end {
                    return Err(ProfileError::OverlappingSegments {
                        index,
                        start: seg.start,
                        prev_end,
                    });
                }
                if seg.start > prev_end {
                    return Err(ProfileError::NonContiguousSegments {
                        index,
                        start: seg.start,
                        prev_end,
                    });
                }
            }
        }
        if !dephasing_pair {
            check_optical_signs(&segments)?;
        }
        Ok(PotentialProfile {
            segments,
            v_left,
            v_right,
            dephasing_pair,
        })
    }

    /// Flat potential `value` on `[lo, hi]` with matching leads.
    pub fn flat(lo: f64, hi: f64, value: f64) -> Result<Self, ProfileError> {
        Self::new([(lo, hi, value)], value, value)
    }

    /// Rectangular barrier of `height` on `[lo, hi]` between zero leads.
    pub fn barrier(lo: f64, hi: f64, height: f64) -> Result<Self, ProfileError> {
        Self::new([(lo, hi, height)], 0.0, 0.0)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn v_left(&self) -> f64 {
        self.v_left
    }

    pub fn v_right(&self) -> f64 {
        self.v_right
    }

    pub fn is_dephasing_pair(&self) -> bool {
        self.dephasing_pair
    }

    /// `[first y_start, last y_end]`.
    pub fn domain(&self) -> (f64, f64) {
        (
            self.segments[0].start,
            self.segments[self.segments.len() - 1].end,
        )
    }

    /// Ordered segment boundaries, `segments().len() + 1` entries.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.segments.iter().map(|s| s.start).collect();
        b.push(self.domain().1);
        b
    }

    pub fn is_real(&self) -> bool {
        self.segments.iter().all(|s| s.value().im == 0.0)
    }

    /// Largest real part of the potential, leads included.
    pub fn max_real(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.value().re)
            .fold(self.v_left.max(self.v_right), f64::max)
    }

    /// Potential at `y`. Segments are half open on the right except the last.
    pub fn value_at(&self, y: f64) -> Complex64 {
        let (lo, hi) = self.domain();
        if y < lo {
            return Complex64::new(self.v_left, 0.0);
        }
        if y > hi {
            return Complex64::new(self.v_right, 0.0);
        }
        let idx = self
            .segments
            .partition_point(|s| s.end <= y)
            .min(self.segments.len() - 1);
        self.segments[idx].value()
    }

    pub fn contains_window(&self, window: &Window) -> bool {
        let (lo, hi) = self.domain();
        window.y_lo >= lo && window.y_hi <= hi
    }

    fn check_window(&self, window: &Window) -> Result<(), ProfileError> {
        if self.contains_window(window) {
            Ok(())
        } else {
            let (domain_lo, domain_hi) = self.domain();
            Err(ProfileError::WindowOutOfDomain {
                lo: window.y_lo,
                hi: window.y_hi,
                domain_lo,
                domain_hi,
            })
        }
    }

    /// Returns a copy with `delta` added on `window`, splitting segments at
    /// the window edges.
    pub fn perturb(&self, window: &Window, delta: Complex64) -> Result<Self, ProfileError> {
        self.check_window(window)?;
        let mut out = Vec::with_capacity(self.segments.len() + 2);
        for seg in &self.segments {
            let mut cuts = vec![seg.start];
            for y in [window.y_lo, window.y_hi] {
                if y > seg.start && y < seg.end {
                    cuts.push(y);
                }
            }
            cuts.push(seg.end);
            for pair in cuts.windows(2) {
                let mut piece = *seg;
                piece.start = pair[0];
                piece.end = pair[1];
                if piece.start >= window.y_lo && piece.end <= window.y_hi {
                    piece.offset += delta;
                }
                out.push(piece);
            }
        }
        Ok(PotentialProfile {
            segments: out,
            v_left: self.v_left,
            v_right: self.v_right,
            dephasing_pair: self.dephasing_pair,
        })
    }

    /// Multiplies every segment value by `factor` (barrier-height sweeps).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for seg in &mut out.segments {
            seg.base = seg.value() * factor;
            seg.offset = Complex64::new(0.0, 0.0);
        }
        out
    }
}

impl fmt::Display for PotentialProfile {
    /// Profile text format: `#vleft`, `#vright` headers, then one
    /// `y_start y_end re(V) im(V)` line per segment.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "#vleft {}", self.v_left)?;
        writeln!(f, "#vright {}", self.v_right)?;
        if self.dephasing_pair {
            writeln!(f, "#dephasing-pair")?;
        }
        for seg in &self.segments {
            let v = seg.value();
            writeln!(f, "{} {} {} {}", seg.start, seg.end, v.re, v.im)?;
        }
        Ok(())
    }
}

impl FromStr for PotentialProfile {
    type Err = ProfileError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut v_left = None;
        let mut v_right = None;
        let mut pair = false;
        let mut segments = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let parse_f = |tok: &str| {
                tok.parse::<f64>().map_err(|_| ProfileError::Parse {
                    line: line_no,
                    message: format!("invalid number {tok:?}"),
                })
            };
            if let Some(header) = line.strip_prefix('#') {
                let mut toks = header.split_whitespace();
                match toks.next() {
                    Some("vleft") => {
                        let tok = toks.next().ok_or_else(|| ProfileError::Parse {
                            line: line_no,
                            message: "#vleft needs a value".into(),
                        })?;
                        v_left = Some(parse_f(tok)?);
                    }
                    Some("vright") => {
                        let tok = toks.next().ok_or_else(|| ProfileError::Parse {
                            line: line_no,
                            message: "#vright needs a value".into(),
                        })?;
                        v_right = Some(parse_f(tok)?);
                    }
                    Some("dephasing-pair") => pair = true,
                    _ => {} // comment
                }
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 4 {
                return Err(ProfileError::Parse {
                    line: line_no,
                    message: format!("expected 4 fields, found {}", toks.len()),
                });
            }
            let start = parse_f(toks[0])?;
            let end = parse_f(toks[1])?;
            let value = Complex64::new(parse_f(toks[2])?, parse_f(toks[3])?);
            segments.push(Segment::new(start, end, value));
        }
        let v_left = v_left.unwrap_or(0.0);
        let v_right = v_right.unwrap_or(v_left);
        if pair {
            PotentialProfile::new_dephasing_pair(segments, v_left, v_right)
        } else {
            PotentialProfile::new(segments, v_left, v_right)
        }
    }
}
