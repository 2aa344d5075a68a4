//! Value parsers for angles, probe families and photon-number ranges.

use std::f64::consts::PI;

use mzdist_core::{FockLevel, ProbeFamily};

/// Radians, either decimal (`0.785`) or as a multiple of pi (`0.25pi`, `pi/4`, `-3pi/4`).
pub fn angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let value = match num.strip_suffix("pi") {
        Some(prefix) => {
            let factor = match prefix.trim() {
                "" | "+" => 1.0,
                "-" => -1.0,
                p => p
                    .parse::<f64>()
                    .map_err(|_| format!("invalid angle '{s}'"))?,
            };
            factor * PI
        }
        None => num
            .parse::<f64>()
            .map_err(|_| format!("invalid angle '{s}'"))?,
    };
    let value = match den {
        Some(d) => {
            let d: f64 = d.parse().map_err(|_| format!("invalid angle '{s}'"))?;
            if d == 0.0 {
                return Err(format!("invalid angle '{s}': division by zero"));
            }
            value / d
        }
        None => value,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("invalid angle '{s}'"))
    }
}

/// Comma-separated angles.
pub fn angles(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(angle)
        .collect()
}

/// `center,width` of the prior window.
pub fn window(s: &str) -> Result<(f64, f64), String> {
    match angles(s)?.as_slice() {
        [c, w] => Ok((*c, *w)),
        _ => Err(format!("window '{s}' must be CENTER,WIDTH")),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Photons(pub Vec<u32>);

/// Photon numbers: `10`, `5..50` / `5-50` (inclusive) or `6,8,10`.
pub fn photons(s: &str) -> Result<Photons, String> {
    let s = s.trim();
    let parse = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| format!("invalid photon number '{t}'"))
    };
    let list = if let Some((a, b)) = s.split_once("..").or_else(|| s.split_once('-')) {
        let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty photon range '{s}'"));
        }
        (a..=b).collect()
    } else {
        s.split(',').map(parse).collect::<Result<Vec<_>, _>>()?
    };
    if list.is_empty() {
        return Err("no photon numbers given".into());
    }
    if let Some(bad) = list.iter().find(|n| !(1..=200).contains(*n)) {
        return Err(format!("photon number {bad} outside [1, 200]"));
    }
    Ok(Photons(list))
}

/// Kind of probe named on the command line; its parameter may come from
/// `--m`, `--zeta` or `--gamma` or inline after a colon.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyToken {
    pub kind: FamilyKind,
    pub inline: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    Noon,
    FockZ,
    Phase,
}

pub fn family_token(s: &str) -> Result<FamilyToken, String> {
    let (name, inline) = match s.split_once(':') {
        Some((n, p)) => (n, Some(p.trim().to_string())),
        None => (s, None),
    };
    let kind = match name.trim().to_ascii_lowercase().as_str() {
        "noon" => FamilyKind::Noon,
        "fockz" | "fock" => FamilyKind::FockZ,
        "phase" => FamilyKind::Phase,
        other => {
            return Err(format!(
                "unknown family '{other}' (expected noon, fockz or phase)"
            ))
        }
    };
    Ok(FamilyToken { kind, inline })
}

/// Defaults applied when a token carries no inline parameter.
#[derive(Clone, Debug, Default)]
pub struct FamilyDefaults {
    pub m: Option<String>,
    pub zeta: Option<f64>,
    pub gamma: Option<f64>,
}

impl FamilyToken {
    pub fn resolve(&self, defaults: &FamilyDefaults) -> Result<ProbeFamily, String> {
        let inline = self.inline.as_deref();
        Ok(match self.kind {
            FamilyKind::Noon => {
                let zeta = match inline {
                    Some(z) => angle(z)?,
                    None => defaults.zeta.unwrap_or(0.0),
                };
                ProbeFamily::Noon { zeta }
            }
            FamilyKind::Phase => {
                let gamma = match inline {
                    Some(g) => angle(g)?,
                    None => defaults.gamma.unwrap_or(PI / 2.0),
                };
                ProbeFamily::PhaseState { gamma }
            }
            FamilyKind::FockZ => {
                let m = inline.or(defaults.m.as_deref()).unwrap_or("+j");
                let level: FockLevel = m
                    .trim_start_matches("m=")
                    .parse()
                    .map_err(|e| format!("{e}"))?;
                ProbeFamily::FockZ(level)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_forms() {
        assert_eq!(angle("0.5pi").unwrap(), PI / 2.0);
        assert_eq!(angle("pi").unwrap(), PI);
        assert_eq!(angle("pi/4").unwrap(), PI / 4.0);
        assert_eq!(angle("3pi/4").unwrap(), 0.75 * PI);
        assert_eq!(angle("-pi").unwrap(), -PI);
        assert_eq!(angle("1e-3").unwrap(), 1e-3);
        assert!(angle("pie").is_err());
        assert!(angle("1/0").is_err());
        assert_eq!(angles("0.5pi,0.75pi,pi").unwrap().len(), 3);
    }

    #[test]
    fn photon_forms() {
        assert_eq!(photons("5..50").unwrap().0.len(), 46);
        assert_eq!(photons("5..=7").unwrap().0, vec![5, 6, 7]);
        assert_eq!(photons("5-7").unwrap().0, vec![5, 6, 7]);
        assert_eq!(photons("6,8").unwrap().0, vec![6, 8]);
        assert!(photons("0").is_err());
        assert!(photons("201").is_err());
        assert!(photons("9..5").is_err());
    }

    #[test]
    fn family_forms() {
        let d = FamilyDefaults::default();
        assert_eq!(
            family_token("noon").unwrap().resolve(&d).unwrap(),
            ProbeFamily::Noon { zeta: 0.0 }
        );
        assert_eq!(
            family_token("phase:0.5pi").unwrap().resolve(&d).unwrap(),
            ProbeFamily::PhaseState { gamma: PI / 2.0 }
        );
        assert_eq!(
            family_token("fockz:+j").unwrap().resolve(&d).unwrap(),
            ProbeFamily::FockZ(FockLevel::Highest)
        );
        let with_m = FamilyDefaults {
            m: Some("0".into()),
            ..Default::default()
        };
        assert!(matches!(
            family_token("fockz").unwrap().resolve(&with_m).unwrap(),
            ProbeFamily::FockZ(FockLevel::Fixed(_))
        ));
        assert!(family_token("squeezed").is_err());
    }
}
