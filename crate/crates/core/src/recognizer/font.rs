//! 5×7 bitmap glyphs shared by the corpus renderer and the toy recognizer.

/// Glyph cell width in font pixels.
pub const GLYPH_W: usize = 5;
/// Glyph cell height in font pixels.
pub const GLYPH_H: usize = 7;
/// Horizontal pitch between consecutive glyph origins, in font pixels.
pub const ADVANCE: usize = 7;
/// Fraction of the bounding quad height occupied by the glyph rows.
pub const GLYPH_FILL: f64 = 0.65;
/// Width-to-height ratio of a text instance's bounding quad.
pub const QUAD_ASPECT: f64 = 4.0;

pub const DEFAULT_ALPHABET: &str = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

const GLYPHS: [(char, [&str; GLYPH_H]); 36] = [
    ('A', [".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"]),
    ('B', ["####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."]),
    ('C', [".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."]),
    ('D', ["###..", "#..#.", "#...#", "#...#", "#...#", "#..#.", "###.."]),
    ('E', ["#####", "#....", "#....", "####.", "#....", "#....", "#####"]),
    ('F', ["#####", "#....", "#....", "####.", "#....", "#....", "#...."]),
    ('G', [".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"]),
    ('H', ["#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"]),
    ('I', [".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."]),
    ('J', ["..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."]),
    ('K', ["#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"]),
    ('L', ["#....", "#....", "#....", "#....", "#....", "#....", "#####"]),
    ('M', ["#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"]),
    ('N', ["#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"]),
    ('O', [".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."]),
    ('P', ["####.", "#...#", "#...#", "####.", "#....", "#....", "#...."]),
    ('Q', [".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"]),
    ('R', ["####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"]),
    ('S', [".####", "#....", "#....", ".###.", "....#", "....#", "####."]),
    ('T', ["#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."]),
    ('U', ["#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."]),
    ('V', ["#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."]),
    ('W', ["#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#."]),
    ('X', ["#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"]),
    ('Y', ["#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."]),
    ('Z', ["#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"]),
    ('0', [".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."]),
    ('1', ["..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."]),
    ('2', [".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"]),
    ('3', ["#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."]),
    ('4', ["...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."]),
    ('5', ["#####", "#....", "####.", "....#", "....#", "#...#", ".###."]),
    ('6', ["..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."]),
    ('7', ["#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."]),
    ('8', [".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."]),
    ('9', [".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."]),
];

/// Binary raster of one character, `GLYPH_H` rows of `GLYPH_W` cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glyph {
    pub ch: char,
    rows: [[bool; GLYPH_W]; GLYPH_H],
}

impl Glyph {
    #[inline]
    pub fn ink(&self, col: usize, row: usize) -> bool {
        self.rows[row][col]
    }

    pub fn ink_count(&self) -> usize {
        self.rows.iter().flatten().filter(|&&b| b).count()
    }
}

/// Looks up the raster for `ch` (case-insensitive).
pub fn glyph(ch: char) -> Option<Glyph> {
    let up = ch.to_ascii_uppercase();
    GLYPHS.iter().find(|(c, _)| *c == up).map(|(c, rows)| {
        let mut bits = [[false; GLYPH_W]; GLYPH_H];
        for (r, row) in rows.iter().enumerate() {
            for (c, b) in row.bytes().enumerate() {
                bits[r][c] = b == b'#';
            }
        }
        Glyph { ch: *c, rows: bits }
    })
}

/// Text laid out in font-pixel units: glyph `i` spans columns
/// `[i·ADVANCE, i·ADVANCE + GLYPH_W)` and rows `[0, GLYPH_H)`.
#[derive(Debug, Clone)]
pub struct TextLine {
    glyphs: Vec<Glyph>,
}

impl TextLine {
    /// Returns `None` when a character has no glyph.
    pub fn new(text: &str) -> Option<Self> {
        text.chars()
            .map(glyph)
            .collect::<Option<Vec<_>>>()
            .map(|glyphs| Self { glyphs })
    }

    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }

    /// Extent in font pixels.
    pub fn width(&self) -> f64 {
        if self.glyphs.is_empty() {
            0.0
        } else {
            ((self.glyphs.len() - 1) * ADVANCE + GLYPH_W) as f64
        }
    }

    /// Ink test at a continuous font-pixel coordinate.
    pub fn ink_at(&self, u: f64, v: f64) -> bool {
        if u < 0.0 || v < 0.0 || v >= GLYPH_H as f64 {
            return false;
        }
        let col = u.floor() as usize;
        let idx = col / ADVANCE;
        let within = col % ADVANCE;
        if idx >= self.glyphs.len() || within >= GLYPH_W {
            return false;
        }
        self.glyphs[idx].ink(within, v.floor() as usize)
    }
}

/// Quad-frame geometry for a line of text: the quad is `QUAD_ASPECT`
/// times as wide as it is tall, with the glyph rows filling `GLYPH_FILL`
/// of its height and the text centered.
#[derive(Debug, Clone, Copy)]
pub struct QuadFrame {
    /// Quad height in font pixels.
    pub height: f64,
    /// Quad width in font pixels.
    pub width: f64,
}

impl Default for QuadFrame {
    fn default() -> Self {
        let height = GLYPH_H as f64 / GLYPH_FILL;
        Self {
            height,
            width: height * QUAD_ASPECT,
        }
    }
}

impl QuadFrame {
    /// Offset of the text origin inside the quad, in font pixels.
    pub fn text_origin(&self, line: &TextLine) -> (f64, f64) {
        (
            (self.width - line.width()) / 2.0,
            (self.height - GLYPH_H as f64) / 2.0,
        )
    }

    /// Longest string that leaves at least one font pixel of margin on each side.
    pub fn max_chars(&self) -> usize {
        (((self.width - 2.0) - GLYPH_W as f64) / ADVANCE as f64).floor() as usize + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_alphabet_char_has_a_distinct_glyph() {
        let glyphs: Vec<Glyph> = DEFAULT_ALPHABET.chars().map(|c| glyph(c).unwrap()).collect();
        for (i, a) in glyphs.iter().enumerate() {
            assert!(a.ink_count() > 5);
            for b in &glyphs[i + 1..] {
                assert_ne!(a.rows, b.rows, "{} vs {}", a.ch, b.ch);
            }
        }
        assert_eq!(glyph('a').unwrap().ch, 'A');
        assert!(glyph('#').is_none());
    }

    #[test]
    fn text_line_ink_lookup() {
        let line = TextLine::new("IL").unwrap();
        assert_eq!(line.width(), 12.0);
        assert!(line.ink_at(2.5, 3.5)); // stem of I
        assert!(!line.ink_at(5.5, 3.5)); // gap
        assert!(line.ink_at(7.5, 6.5)); // foot of L
        assert!(!line.ink_at(13.0, 3.0));
    }

    #[test]
    fn frame_fits_five_chars() {
        let f = QuadFrame::default();
        assert!(f.max_chars() >= 5);
        let line = TextLine::new("ABCDE").unwrap();
        let (ox, oy) = f.text_origin(&line);
        assert!(ox > 1.0 && oy > 1.0);
    }
}
