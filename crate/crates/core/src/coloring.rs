//! Bag colorings over the palette `{0, 1, ..., w, selected}` and their
//! mixed-radix encoding.
//!
//! A finite color `s` on a bag vertex asks for at least `s` selected
//! neighbors inside the processed subgraph; `Selected` puts the vertex in the
//! set. The digit of position `i` in a coloring index is the code of the
//! color of the `i`-th bag vertex (bags are sorted), least significant first.
//! Finite colors encode as themselves and `Selected` as `w + 1`.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Color {
    Need(usize),
    Selected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Palette {
    w: usize,
}

impl Palette {
    pub fn new(w: usize) -> Self {
        assert!(w >= 1, "w must be positive");
        Palette { w }
    }

    pub fn w(&self) -> usize {
        self.w
    }

    /// Number of colors, `w + 2`.
    pub fn radix(&self) -> usize {
        self.w + 2
    }

    pub fn selected_code(&self) -> usize {
        self.w + 1
    }

    pub fn code(&self, color: Color) -> usize {
        match color {
            Color::Need(s) => {
                assert!(s <= self.w, "color {s} exceeds w = {}", self.w);
                s
            }
            Color::Selected => self.selected_code(),
        }
    }

    pub fn color(&self, code: usize) -> Color {
        match code {
            c if c <= self.w => Color::Need(c),
            c if c == self.selected_code() => Color::Selected,
            c => panic!("color code {c} outside palette of size {}", self.radix()),
        }
    }

    /// `radix^len`, or `None` on overflow.
    pub fn table_len(&self, len: usize) -> Option<usize> {
        self.radix().checked_pow(u32::try_from(len).ok()?)
    }

    pub fn powers(&self, len: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(len + 1);
        let mut p = 1usize;
        for _ in 0..=len {
            out.push(p);
            p = p.saturating_mul(self.radix());
        }
        out
    }
}

/// A coloring of a bag, one color per bag position.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coloring(pub Vec<Color>);

impl Coloring {
    pub fn encode(&self, palette: &Palette) -> usize {
        self.0
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * palette.radix() + palette.code(c))
    }

    pub fn decode(mut index: usize, len: usize, palette: &Palette) -> Self {
        let mut colors = Vec::with_capacity(len);
        for _ in 0..len {
            colors.push(palette.color(index % palette.radix()));
            index /= palette.radix();
        }
        Coloring(colors)
    }

    /// The partial order on colorings: finite colors compare numerically,
    /// `Selected` is comparable only to itself.
    pub fn precedes(&self, other: &Coloring) -> bool {
        self.0.len() == other.0.len()
            && self.0.iter().zip(&other.0).all(|(a, b)| match (a, b) {
                (Color::Need(x), Color::Need(y)) => x <= y,
                (Color::Selected, Color::Selected) => true,
                _ => false,
            })
    }

    pub fn count(&self, color: Color) -> usize {
        self.0.iter().filter(|&&c| c == color).count()
    }
}

impl fmt::Display for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match c {
                Color::Need(s) => write!(f, "{s}")?,
                Color::Selected => write!(f, "∞")?,
            }
        }
        write!(f, ")")
    }
}

/// Digit at `pos` of a mixed-radix index.
#[inline]
pub(crate) fn digit(index: usize, pos: usize, powers: &[usize], radix: usize) -> usize {
    (index / powers[pos]) % radix
}

/// Index obtained by inserting `d` as the new digit `pos`.
#[inline]
pub(crate) fn insert_digit(index: usize, pos: usize, d: usize, powers: &[usize]) -> usize {
    let low = index % powers[pos];
    let high = index / powers[pos];
    low + d * powers[pos] + high * powers[pos + 1]
}

/// Index obtained by deleting digit `pos`.
#[inline]
pub(crate) fn remove_digit(index: usize, pos: usize, powers: &[usize]) -> usize {
    let low = index % powers[pos];
    let high = index / powers[pos + 1];
    low + high * powers[pos]
}

/// Odometer over all digit vectors of `len` digits in base `radix`, in index order.
pub(crate) struct Odometer {
    pub digits: Vec<usize>,
    radix: usize,
    started: bool,
}

impl Odometer {
    pub fn new(len: usize, radix: usize) -> Self {
        Odometer {
            digits: vec![0; len],
            radix,
            started: false,
        }
    }

    /// Advances to the next vector; returns `false` once exhausted.
    pub fn advance(&mut self) -> bool {
        if !self.started {
            self.started = true;
            return true;
        }
        for d in self.digits.iter_mut() {
            *d += 1;
            if *d < self.radix {
                return true;
            }
            *d = 0;
        }
        false
    }
}
