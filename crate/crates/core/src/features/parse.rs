//! Recursive-descent parser for feature names.
//!
//! ```text
//! feature := band
//!          | "(" band ")" "^" exponent
//!          | "NR" "(" band "," band ")"
//!          | ("TB" | "LH") "(" band "," band "," band ")"
//! band    := "B" [0-9A-Za-z]+
//! ```
//!
//! Whitespace is allowed between tokens.

use super::{FeatureError, FeatureExpr};
use crate::spectra::BandId;

struct Cursor<'a> {
    input: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(input: &'a str) -> Self {
        Cursor { input, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.input[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.input.len() - trimmed.len();
    }

    fn error(&self, message: impl Into<String>) -> FeatureError {
        FeatureError::Syntax { input: self.input.to_string(), pos: self.pos, message: message.into() }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), FeatureError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{token}`")))
        }
    }

    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let rest = self.rest();
        let len = rest.find(|c: char| !c.is_ascii_alphanumeric()).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn band(&mut self) -> Result<BandId, FeatureError> {
        let start = self.pos;
        let token = self.word();
        if token.is_empty() {
            self.pos = start;
            return Err(self.error("expected a band"));
        }
        if let Some(band) = BandId::from_name(token) {
            Ok(band)
        } else if BandId::is_excluded_name(token) {
            Err(FeatureError::ExcludedBand(token.to_string()))
        } else {
            Err(FeatureError::UnknownBand(token.to_string()))
        }
    }

    fn band_list<const N: usize>(&mut self) -> Result<[BandId; N], FeatureError> {
        self.expect("(")?;
        let mut bands = [BandId::B1; N];
        for (n, slot) in bands.iter_mut().enumerate() {
            if n > 0 {
                self.expect(",")?;
            }
            *slot = self.band()?;
        }
        self.expect(")")?;
        Ok(bands)
    }

    fn finish(&mut self) -> Result<(), FeatureError> {
        self.skip_ws();
        if self.rest().is_empty() {
            Ok(())
        } else {
            Err(self.error("trailing input"))
        }
    }
}

/// Parses a canonical feature name such as `LH(B7,B8A,B11)` or `(B4)^3`.
pub fn parse_feature(name: &str) -> Result<FeatureExpr, FeatureError> {
    let mut cur = Cursor::new(name);
    let expr = if cur.eat("(") {
        let band = cur.band()?;
        cur.expect(")")?;
        cur.expect("^")?;
        let digits = cur.word();
        let exponent: u32 = digits
            .parse()
            .map_err(|_| cur.error(format!("invalid exponent `{digits}`")))?;
        FeatureExpr::power(band, exponent)?
    } else {
        let save = cur.pos;
        match cur.word() {
            "NR" => {
                let [i, j] = cur.band_list::<2>()?;
                FeatureExpr::norm_ratio(i, j)?
            }
            "TB" => {
                let [i, j, k] = cur.band_list::<3>()?;
                FeatureExpr::three_band(i, j, k)?
            }
            "LH" => {
                let [i, j, k] = cur.band_list::<3>()?;
                FeatureExpr::line_height(i, j, k)?
            }
            _ => {
                cur.pos = save;
                FeatureExpr::Band(cur.band()?)
            }
        }
    };
    cur.finish()?;
    Ok(expr)
}

/// Parses a list of names, keeping the first occurrence of any repeated feature.
///
/// Returns the de-duplicated expressions and the names that were dropped.
pub fn parse_feature_list<S: AsRef<str>>(
    names: &[S],
) -> Result<(Vec<FeatureExpr>, Vec<String>), FeatureError> {
    let mut exprs: Vec<FeatureExpr> = Vec::with_capacity(names.len());
    let mut dropped = Vec::new();
    for name in names {
        let e = parse_feature(name.as_ref())?;
        if exprs.contains(&e) {
            dropped.push(name.as_ref().to_string());
        } else {
            exprs.push(e);
        }
    }
    Ok((exprs, dropped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use BandId::*;

    #[test]
    fn parses_each_form() {
        assert_eq!(parse_feature("B2").unwrap(), FeatureExpr::Band(B2));
        assert_eq!(parse_feature("(B4)^3").unwrap(), FeatureExpr::Power(B4, 3));
        assert_eq!(parse_feature("NR(B2,B3)").unwrap(), FeatureExpr::NormRatio(B2, B3));
        assert_eq!(parse_feature("TB(B2,B3,B4)").unwrap(), FeatureExpr::ThreeBand(B2, B3, B4));
        assert_eq!(
            parse_feature("LH(B7,B8A,B11)").unwrap(),
            FeatureExpr::LineHeight(B7, B8A, B11)
        );
        assert_eq!(parse_feature(" LH( B1 , B2,B3 ) ").unwrap(), FeatureExpr::LineHeight(B1, B2, B3));
    }

    #[test]
    fn rejects_excluded_and_unknown_bands() {
        assert_eq!(parse_feature("NR(B2,B9)"), Err(FeatureError::ExcludedBand("B9".into())));
        assert_eq!(parse_feature("B8"), Err(FeatureError::ExcludedBand("B8".into())));
        assert_eq!(parse_feature("B13"), Err(FeatureError::UnknownBand("B13".into())));
        assert_eq!(parse_feature("(X1)^2"), Err(FeatureError::UnknownBand("X1".into())));
    }

    #[test]
    fn rejects_non_consecutive_triples() {
        assert_eq!(
            parse_feature("LH(B1,B3,B4)"),
            Err(FeatureError::NotConsecutive([B1, B3, B4]))
        );
        // B8A -> B11 is consecutive only because B9 and B10 are not retained
        assert!(parse_feature("TB(B8A,B11,B12)").is_ok());
    }

    #[test]
    fn syntax_errors() {
        for bad in ["", "(B4)^", "(B4)^4", "NR(B2)", "NR(B2,B3", "LH(B1,B2,B3) x", "(B4)3", "NR(B2,B2)"] {
            assert!(parse_feature(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn list_drops_duplicates() {
        let ss = ["B3", "B3", "(B3)^3", "B4", "(B4)^2", "(B4)^3", "B5", "(B5)^3", "LH(B4,B5,B6)", "LH(B5,B6,B7)"];
        let (exprs, dropped) = parse_feature_list(&ss).unwrap();
        assert_eq!(exprs.len(), 9);
        assert_eq!(dropped, ["B3"]);
    }
}
