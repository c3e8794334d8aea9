//! Model files and output targets for the command-line front end.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::poly::parse::parse_rat;
use crate::scalar::Rat;

/// A model given either inline (`{...}`) or as a path to a JSON file.
pub fn load_spec(arg: &str) -> Result<ModelSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| Error::Input(format!("cannot read model `{arg}`: {e}")))?
    };
    ModelSpec::from_json(&text).map_err(|e| match e {
        Error::Json(j) => Error::Input(format!("model `{arg}`: {j}")),
        e => e,
    })
}

/// Applies `name=value` overrides; `name=` frees the parameter.
pub fn apply_sets(spec: &mut ModelSpec, sets: &[String]) -> Result<()> {
    for s in sets {
        let (k, v) = s.split_once('=').ok_or_else(|| Error::Input(format!("`--set {s}`: expected name=value")))?;
        let k = k.trim();
        let slot = spec.params.get_mut(k).ok_or_else(|| Error::Input(format!("`--set`: unknown parameter `{k}`")))?;
        let v = v.trim();
        *slot = if v.is_empty() { None } else { Some(v.to_string()) };
    }
    Ok(())
}

/// `lo:hi,lo:hi`.
pub fn parse_box(s: &str) -> Result<[(Rat, Rat); 2]> {
    let bad = || Error::Input(format!("`--box {s}`: expected lo:hi,lo:hi"));
    let mut axes = s.split(',').map(|a| {
        let (lo, hi) = a.split_once(':').ok_or_else(bad)?;
        Ok::<_, Error>((parse_rat(lo.trim())?, parse_rat(hi.trim())?))
    });
    let x = axes.next().ok_or_else(bad)??;
    let y = axes.next().ok_or_else(bad)??;
    if axes.next().is_some() {
        return Err(bad());
    }
    Ok([x, y])
}

/// `400` or `400x300`.
pub fn parse_resolution(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Input(format!("`--res {s}`: expected N or NXxNY"));
    let n = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Ok((n(a)?, n(b)?)),
        None => {
            let k = n(s)?;
            Ok((k, k))
        }
    }
}

/// Writes to the file when given, else to `out`.
pub fn emit(path: Option<&Path>, bytes: &[u8], out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => out.write_all(bytes)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    #[test]
    fn boxes_and_resolutions() {
        let b = parse_box("-2:2,-1/2:0.75").unwrap();
        assert_eq!(b[0], (rat_int(-2), rat_int(2)));
        assert_eq!(b[1], (rat(-1, 2), rat(3, 4)));
        assert!(parse_box("-2:2").is_err());
        assert_eq!(parse_resolution("400").unwrap(), (400, 400));
        assert_eq!(parse_resolution("64x32").unwrap(), (64, 32));
        assert!(parse_resolution("big").is_err());
    }

    #[test]
    fn inline_spec_and_overrides() {
        let mut s = load_spec(r#"{"family":"gpm","dim":4,"params":{"a":null,"b":null}}"#).unwrap();
        apply_sets(&mut s, &["a=1/2".into()]).unwrap();
        assert_eq!(s.params["a"].as_deref(), Some("1/2"));
        assert!(apply_sets(&mut s, &["c=1".into()]).is_err());
        assert!(load_spec("/nonexistent/model.json").is_err());
    }
}
