//! Chronological limits `L̂` and `Ľ` over finite function catalogs.

use crate::busemann::BusemannFunction;
use crate::completion::{tail_window, MIN_TERMS};
use crate::function::SampledFunction;
use crate::graph::SampledSpace;
use crate::gromov::{is_lipschitz1, LipschitzAudit};
use crate::scalar::{to_f64, Scalar};
use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "id")]
pub enum EntryKind {
    Boundary,
    Interior(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry<T> {
    pub label: String,
    pub kind: EntryKind,
    pub function: SampledFunction<T>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChronoError {
    #[error("sequence has {0} terms, at least 8 are needed")]
    TooShort(usize),
    #[error("catalog entry {label} is not 1-Lipschitz (excess {excess})")]
    NotLipschitz { label: String, excess: f64 },
    #[error("catalog entry {0} is infinite")]
    Infinite(String),
    #[error("functions live on different windows")]
    WindowMismatch,
}

/// Candidate universe for the maximality condition. Entries are distinct
/// as classes: a new entry within `tol` of an existing class is dropped.
#[derive(Clone, Debug, Default)]
pub struct FunctionCatalog<T> {
    pub entries: Vec<CatalogEntry<T>>,
}

impl<T: Scalar> FunctionCatalog<T> {
    pub fn new() -> Self {
        FunctionCatalog { entries: Vec::new() }
    }

    /// Adds an entry unless its class is already present; returns the index
    /// of the class holding it.
    pub fn push(&mut self, entry: CatalogEntry<T>, tol: T) -> Result<usize, ChronoError> {
        if let Some(first) = self.entries.first() {
            if !first.function.same_window(&entry.function) {
                return Err(ChronoError::WindowMismatch);
            }
        }
        if let Some(k) = self.entries.iter().position(|e| e.function.class_distance(&entry.function) <= tol) {
            return Ok(k);
        }
        self.entries.push(entry);
        Ok(self.entries.len() - 1)
    }

    /// Adds a finite Busemann function as a boundary entry.
    pub fn push_busemann(&mut self, label: &str, b: &BusemannFunction<T>, tol: T) -> Result<usize, ChronoError> {
        let f = b.values.clone().ok_or_else(|| ChronoError::Infinite(label.to_string()))?;
        self.push(CatalogEntry { label: label.to_string(), kind: EntryKind::Boundary, function: f }, tol)
    }

    /// Edgewise 1-Lipschitz audit of every entry (use the reversed space
    /// for backward catalogs).
    pub fn audit(&self, space: &SampledSpace<T>, tol: T) -> Result<(), ChronoError> {
        for e in &self.entries {
            let LipschitzAudit { ok, worst_excess, .. } = is_lipschitz1(&e.function, space, tol);
            if !ok {
                return Err(ChronoError::NotLipschitz { label: e.label.clone(), excess: worst_excess });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
    pub fn labels(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.label.as_str()).collect()
    }
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.label == label)
    }
}

fn tail<T: Scalar>(seq: &[SampledFunction<T>]) -> Result<&[SampledFunction<T>], ChronoError> {
    if seq.len() < MIN_TERMS {
        return Err(ChronoError::TooShort(seq.len()));
    }
    if seq.windows(2).any(|w| !w[0].same_window(&w[1])) {
        return Err(ChronoError::WindowMismatch);
    }
    Ok(&seq[seq.len() - tail_window(seq.len())..])
}

/// Per-sample minimum over the tail window.
pub fn liminf_fn<T: Scalar>(seq: &[SampledFunction<T>]) -> Result<SampledFunction<T>, ChronoError> {
    let t = tail(seq)?;
    Ok(t[1..].iter().fold(t[0].clone(), |acc, f| acc.zip(f, T::min)))
}

/// Per-sample maximum over the tail window.
pub fn limsup_fn<T: Scalar>(seq: &[SampledFunction<T>]) -> Result<SampledFunction<T>, ChronoError> {
    let t = tail(seq)?;
    Ok(t[1..].iter().fold(t[0].clone(), |acc, f| acc.zip(f, T::max)))
}

/// Why a candidate was accepted or rejected.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateDiagnostic {
    pub label: String,
    pub member: bool,
    /// Constant added to the catalog representative.
    pub shift: f64,
    /// Catalog entry that breaks maximality, if any.
    pub blocked_by: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LhatResult<T> {
    pub members: Vec<String>,
    pub liminf: SampledFunction<T>,
    pub limsup: SampledFunction<T>,
    pub hausdorff_witness: bool,
    pub diagnostics: Vec<CandidateDiagnostic>,
}

impl<T: Scalar> LhatResult<T> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "members": self.members,
            "hausdorff_witness": self.hausdorff_witness,
            "diagnostics": self.diagnostics,
            "liminf": self.liminf.to_json(),
            "limsup": self.limsup.to_json(),
        })
    }
}

/// `g + c` with `c ∈ [lo, hi]` fits between the bounds; it blocks the
/// candidate unless every such shift coincides with `fstar`. `anchor` is the
/// shift pinned against `fstar`.
fn blocks<T: Scalar>(fstar: &SampledFunction<T>, g: &SampledFunction<T>, lo: T, hi: T, anchor: T, tol: T) -> bool {
    lo <= hi + tol && (hi - lo > tol || g.shift(anchor).sup_distance(fstar) > tol)
}

fn lhat_candidate<T: Scalar>(
    k: usize,
    liminf: &SampledFunction<T>,
    limsup: &SampledFunction<T>,
    catalog: &FunctionCatalog<T>,
    tol: T,
) -> CandidateDiagnostic {
    let f = &catalog.entries[k].function;
    // Largest shift with f + c ≤ liminf.
    let c = liminf.inf_minus(f);
    let fstar = f.shift(c);
    let blocked_by = catalog.entries.iter().find_map(|e| {
        let g = &e.function;
        let lo = fstar.sup_minus(g);
        let hi = limsup.inf_minus(g);
        blocks(&fstar, g, lo, hi, lo, tol).then(|| e.label.clone())
    });
    CandidateDiagnostic { label: catalog.entries[k].label.clone(), member: blocked_by.is_none(), shift: to_f64(c), blocked_by }
}

fn ldual_candidate<T: Scalar>(
    k: usize,
    liminf: &SampledFunction<T>,
    limsup: &SampledFunction<T>,
    catalog: &FunctionCatalog<T>,
    tol: T,
) -> CandidateDiagnostic {
    let f = &catalog.entries[k].function;
    // Smallest shift with f + c ≥ limsup.
    let c = limsup.sup_minus(f);
    let fstar = f.shift(c);
    let blocked_by = catalog.entries.iter().find_map(|e| {
        let g = &e.function;
        let lo = liminf.sup_minus(g);
        let hi = fstar.inf_minus(g);
        blocks(&fstar, g, lo, hi, hi, tol).then(|| e.label.clone())
    });
    CandidateDiagnostic { label: catalog.entries[k].label.clone(), member: blocked_by.is_none(), shift: to_f64(c), blocked_by }
}

/// Whether catalog entry `k` (up to an additive constant) lies in `L̂(seq)`.
pub fn in_lhat<T: Scalar>(k: usize, seq: &[SampledFunction<T>], catalog: &FunctionCatalog<T>, tol: T) -> Result<bool, ChronoError> {
    let (lo, hi) = (liminf_fn(seq)?, limsup_fn(seq)?);
    Ok(lhat_candidate(k, &lo, &hi, catalog, tol).member)
}

/// `L̂(seq)` restricted to the catalog.
pub fn chr_limits<T: Scalar>(seq: &[SampledFunction<T>], catalog: &FunctionCatalog<T>, tol: T) -> Result<LhatResult<T>, ChronoError> {
    let liminf = liminf_fn(seq)?;
    let limsup = limsup_fn(seq)?;
    let diagnostics: Vec<_> = (0..catalog.len()).map(|k| lhat_candidate(k, &liminf, &limsup, catalog, tol)).collect();
    Ok(finish(liminf, limsup, diagnostics))
}

/// Whether entry `k` lies in `Ľ(seq)` over a backward catalog.
pub fn check_ldual<T: Scalar>(k: usize, seq: &[SampledFunction<T>], catalog: &FunctionCatalog<T>, tol: T) -> Result<bool, ChronoError> {
    let (lo, hi) = (liminf_fn(seq)?, limsup_fn(seq)?);
    Ok(ldual_candidate(k, &lo, &hi, catalog, tol).member)
}

/// `Ľ(seq)` restricted to the catalog.
pub fn chr_limits_dual<T: Scalar>(seq: &[SampledFunction<T>], catalog: &FunctionCatalog<T>, tol: T) -> Result<LhatResult<T>, ChronoError> {
    let liminf = liminf_fn(seq)?;
    let limsup = limsup_fn(seq)?;
    let diagnostics: Vec<_> = (0..catalog.len()).map(|k| ldual_candidate(k, &liminf, &limsup, catalog, tol)).collect();
    Ok(finish(liminf, limsup, diagnostics))
}

fn finish<T: Scalar>(liminf: SampledFunction<T>, limsup: SampledFunction<T>, diagnostics: Vec<CandidateDiagnostic>) -> LhatResult<T> {
    let members: Vec<String> = diagnostics.iter().filter(|d| d.member).map(|d| d.label.clone()).collect();
    LhatResult { hausdorff_witness: members.len() >= 2, members, liminf, limsup, diagnostics }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::Window;

    fn w() -> Window {
        (0..5).collect::<Vec<_>>().into()
    }

    fn func(v: &[f64]) -> SampledFunction<f64> {
        SampledFunction::new(w(), v.to_vec(), 0)
    }

    fn entry(label: &str, v: &[f64]) -> CatalogEntry<f64> {
        CatalogEntry { label: label.into(), kind: EntryKind::Boundary, function: func(v) }
    }

    fn catalog() -> FunctionCatalog<f64> {
        let mut c = FunctionCatalog::new();
        c.push(entry("up", &[0.0, 1.0, 2.0, 3.0, 4.0]), 0.01).unwrap();
        c.push(entry("down", &[4.0, 3.0, 2.0, 1.0, 0.0]), 0.01).unwrap();
        c.push(entry("flat", &[0.0, 0.0, 0.0, 0.0, 0.0]), 0.01).unwrap();
        c
    }

    #[test]
    fn liminf_limsup_examples() {
        let f = func(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let g = func(&[4.0, 3.0, 2.0, 1.0, 0.0]);
        let constant = vec![f.clone(); 8];
        assert_eq!(liminf_fn(&constant).unwrap(), f);
        assert_eq!(limsup_fn(&constant).unwrap(), f);
        let alt: Vec<_> = (0..12).map(|n| if n % 2 == 0 { f.clone() } else { g.clone() }).collect();
        assert_eq!(liminf_fn(&alt).unwrap().values(), &[0.0, 1.0, 2.0, 1.0, 0.0]);
        assert_eq!(limsup_fn(&alt).unwrap().values(), &[4.0, 3.0, 2.0, 3.0, 4.0]);
        assert!(liminf_fn(&alt[..5]).is_err());
    }

    #[test]
    fn constant_sequence_is_t1() {
        let cat = catalog();
        let seq = vec![cat.entries[0].function.shift(2.0); 10];
        let r = chr_limits(&seq, &cat, 0.01).unwrap();
        assert_eq!(r.members, vec!["up"]);
        assert!(!r.hausdorff_witness);
        let d = chr_limits_dual(&seq, &cat, 0.01).unwrap();
        assert_eq!(d.members, vec!["up"]);
    }

    #[test]
    fn max_of_ramps_has_two_limits() {
        let mut cat = catalog();
        cat.entries.truncate(2);
        let m = func(&[4.0, 3.0, 2.0, 3.0, 4.0]);
        let seq = vec![m; 10];
        let r = chr_limits(&seq, &cat, 0.01).unwrap();
        assert_eq!(r.members, vec!["up", "down"]);
        assert!(r.hausdorff_witness);
    }

    #[test]
    fn alternating_ramps_are_blocked() {
        let cat = catalog();
        let seq: Vec<_> = (0..12).map(|n| cat.entries[n % 2].function.clone()).collect();
        let r = chr_limits(&seq, &cat, 0.01).unwrap();
        assert!(r.members.is_empty());
        assert!(r.diagnostics.iter().all(|d| d.blocked_by.is_some()));
        assert!(!in_lhat(2, &seq, &cat, 0.01).unwrap());
    }

    #[test]
    fn duplicate_classes_collapse() {
        let mut cat = catalog();
        let k = cat.push(entry("up2", &[5.0, 6.0, 7.0, 8.0, 9.0]), 0.01).unwrap();
        assert_eq!(k, 0);
        assert_eq!(cat.len(), 3);
    }
}
