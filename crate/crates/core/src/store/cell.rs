/// Value of one variable in a lazy sample, with its 2-bit encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum CellValue {
    False = 0b00,
    True = 0b01,
    /// Not yet drawn.
    Mark = 0b11,
}

impl CellValue {
    #[inline]
    pub fn from_bool(value: bool) -> Self {
        if value {
            Self::True
        } else {
            Self::False
        }
    }

    /// Decodes a 2-bit pattern. `0b10` is not a valid cell.
    #[inline]
    pub fn from_bits(bits: u8) -> Option<Self> {
        match bits {
            0b00 => Some(Self::False),
            0b01 => Some(Self::True),
            0b11 => Some(Self::Mark),
            _ => None,
        }
    }

    #[inline]
    pub fn bits(self) -> u8 {
        self as u8
    }

    pub fn is_mark(self) -> bool {
        self == Self::Mark
    }

    /// Dump character: `0`, `1` or `?`.
    pub fn symbol(self) -> char {
        match self {
            Self::False => '0',
            Self::True => '1',
            Self::Mark => '?',
        }
    }
}
