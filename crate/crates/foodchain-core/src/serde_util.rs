//! Serde helpers shared by report types.

/// Serialize `[Complex64; 3]` as an array of `{"re": .., "im": ..}` objects.
pub mod serde_eigs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct ReIm {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(eigs: &[Complex64; 3], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<ReIm> = eigs.iter().map(|e| ReIm { re: e.re, im: e.im }).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Complex64; 3], D::Error> {
        let v: Vec<ReIm> = Vec::deserialize(d)?;
        if v.len() != 3 {
            return Err(serde::de::Error::custom("expected exactly 3 eigenvalues"));
        }
        let mut out = [Complex64::default(); 3];
        for (o, e) in out.iter_mut().zip(v) {
            *o = Complex64::new(e.re, e.im);
        }
        Ok(out)
    }
}
