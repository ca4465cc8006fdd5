//! Colour values, parsing (CSS and legacy HTML attribute forms) and the
//! relative-luminance contrast ratio.

use std::fmt;

use serde::{Serialize, Serializer};

/// sRGB colour with straight (non-premultiplied) alpha in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rgba {
    pub r: u8,
    pub g: u8,
    pub b: u8,
    pub a: f64,
}

impl Rgba {
    pub const BLACK: Rgba = Rgba::opaque(0, 0, 0);
    pub const WHITE: Rgba = Rgba::opaque(255, 255, 255);
    pub const TRANSPARENT: Rgba = Rgba {
        r: 0,
        g: 0,
        b: 0,
        a: 0.0,
    };

    pub const fn opaque(r: u8, g: u8, b: u8) -> Rgba {
        Rgba { r, g, b, a: 1.0 }
    }

    pub fn from_hex(hex: &str) -> Option<Rgba> {
        let hex = hex.strip_prefix('#').unwrap_or(hex);
        if !hex.chars().all(|c| c.is_ascii_hexdigit()) {
            return None;
        }
        let nib = |i: usize| u8::from_str_radix(&hex[i..i + 1], 16).ok();
        let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).ok();
        match hex.len() {
            3 => Some(Rgba::opaque(nib(0)? * 17, nib(1)? * 17, nib(2)? * 17)),
            6 => Some(Rgba::opaque(byte(0)?, byte(2)?, byte(4)?)),
            8 => Some(Rgba {
                a: f64::from(byte(6)?) / 255.0,
                ..Rgba::opaque(byte(0)?, byte(2)?, byte(4)?)
            }),
            _ => None,
        }
    }

    pub fn is_transparent(&self) -> bool {
        self.a <= 0.0
    }

    pub fn is_opaque(&self) -> bool {
        self.a >= 1.0
    }

    /// Source-over compositing of `self` onto an opaque `backdrop`.
    pub fn over(self, backdrop: Rgba) -> Rgba {
        let a = self.a.clamp(0.0, 1.0);
        let mix = |f: u8, b: u8| (f64::from(f) * a + f64::from(b) * (1.0 - a)).round() as u8;
        Rgba::opaque(
            mix(self.r, backdrop.r),
            mix(self.g, backdrop.g),
            mix(self.b, backdrop.b),
        )
    }

    /// Relative luminance of the opaque colour (alpha ignored).
    pub fn relative_luminance(&self) -> f64 {
        fn linear(channel: u8) -> f64 {
            let c = f64::from(channel) / 255.0;
            if c <= 0.04045 {
                c / 12.92
            } else {
                ((c + 0.055) / 1.055).powf(2.4)
            }
        }
        0.2126 * linear(self.r) + 0.7152 * linear(self.g) + 0.0722 * linear(self.b)
    }
}

impl fmt::Display for Rgba {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_opaque() {
            write!(f, "#{:02X}{:02X}{:02X}", self.r, self.g, self.b)
        } else {
            write!(f, "rgba({}, {}, {}, {})", self.r, self.g, self.b, self.a)
        }
    }
}

impl Serialize for Rgba {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Contrast ratio `(L1 + 0.05) / (L2 + 0.05)` with `L1 >= L2`.
///
/// `fg` is composited over `bg` first; a translucent `bg` is itself
/// composited over white.
pub fn contrast_ratio(fg: Rgba, bg: Rgba) -> f64 {
    let bg = if bg.is_opaque() { bg } else { bg.over(Rgba::WHITE) };
    let fg = fg.over(bg);
    let (l1, l2) = {
        let a = fg.relative_luminance();
        let b = bg.relative_luminance();
        if a >= b {
            (a, b)
        } else {
            (b, a)
        }
    };
    (l1 + 0.05) / (l2 + 0.05)
}

/// Parses a CSS colour value. Email HTML is rendered in quirks mode, so a
/// bare hex triplet or sextet without `#` is accepted as well.
pub fn parse_css_color(value: &str) -> Option<Rgba> {
    let v = value.trim();
    if v.is_empty() {
        return None;
    }
    if v.eq_ignore_ascii_case("transparent") {
        return Some(Rgba::TRANSPARENT);
    }
    if let Ok(c) = csscolorparser::parse(v) {
        let [r, g, b, _] = c.to_rgba8();
        return Some(Rgba {
            r,
            g,
            b,
            a: f64::from(c.a).clamp(0.0, 1.0),
        });
    }
    if matches!(v.len(), 3 | 6) && v.chars().all(|c| c.is_ascii_hexdigit()) {
        return Rgba::from_hex(v);
    }
    None
}

/// Parses an HTML presentational colour attribute (`<font color=...>`,
/// `bgcolor=...`) with the legacy colour value rules browsers apply.
pub fn parse_legacy_color(value: &str) -> Option<Rgba> {
    let input = value.trim();
    if input.is_empty() || input.eq_ignore_ascii_case("transparent") {
        return None;
    }
    if !input.starts_with('#') {
        if let Ok(c) = csscolorparser::parse(input) {
            // named colours only; functional notations are not legacy values
            if input.chars().all(|c| c.is_ascii_alphabetic()) {
                let [r, g, b, _] = c.to_rgba8();
                return Some(Rgba::opaque(r, g, b));
            }
        }
    }
    if input.len() == 4 && input.starts_with('#') {
        if let Some(c) = Rgba::from_hex(input) {
            return Some(c);
        }
    }

    // Replace characters beyond the BMP with "00", drop '#', map non-hex to '0'.
    let mut s: String = input
        .chars()
        .flat_map(|c| {
            if (c as u32) > 0xFFFF {
                vec!['0', '0']
            } else {
                vec![c]
            }
        })
        .collect();
    if s.chars().count() > 128 {
        s = s.chars().take(128).collect();
    }
    if let Some(rest) = s.strip_prefix('#') {
        s = rest.to_string();
    }
    let mut digits: Vec<char> = s
        .chars()
        .map(|c| if c.is_ascii_hexdigit() { c } else { '0' })
        .collect();
    while digits.is_empty() || !digits.len().is_multiple_of(3) {
        digits.push('0');
    }
    let mut len = digits.len() / 3;
    let mut comps: Vec<Vec<char>> = digits.chunks(len).map(|c| c.to_vec()).collect();
    if len > 8 {
        for comp in comps.iter_mut() {
            comp.drain(..len - 8);
        }
        len = 8;
    }
    while len > 2 && comps.iter().all(|c| c[0] == '0') {
        for comp in comps.iter_mut() {
            comp.remove(0);
        }
        len -= 1;
    }
    if len > 2 {
        for comp in comps.iter_mut() {
            comp.truncate(2);
        }
    }
    let channel = |c: &Vec<char>| -> u8 {
        let s: String = c.iter().collect();
        u8::from_str_radix(&s, 16).unwrap_or(0)
    };
    Some(Rgba::opaque(
        channel(&comps[0]),
        channel(&comps[1]),
        channel(&comps[2]),
    ))
}
