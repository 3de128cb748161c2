//! Real functions sampled on a window of point ids.

use crate::extended::Ext;
use crate::scalar::{to_f64, Scalar};
use serde::Serialize;
use std::fmt::Write as _;
use std::sync::Arc;

/// Shared list of sample ids on which functions are evaluated.
pub type Window = Arc<[usize]>;

/// Finite values on a window with a normalization base point.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction<T> {
    ids: Window,
    values: Vec<T>,
    base_pos: usize,
}

impl<T: Scalar> SampledFunction<T> {
    /// Panics when lengths disagree, a value is not finite or the base is
    /// not in the window.
    pub fn new(ids: Window, values: Vec<T>, base_id: usize) -> Self {
        assert_eq!(ids.len(), values.len(), "one value per window point");
        assert!(values.iter().all(|v| v.is_finite()), "sampled functions are finite");
        let base_pos = ids.iter().position(|&i| i == base_id).expect("base point inside the window");
        SampledFunction { ids, values, base_pos }
    }

    /// Builds from a full-sample row; `None` if some window value is `∞`.
    pub fn from_row(ids: Window, row: &[Ext<T>], sign: T, offset: T, base_id: usize) -> Option<Self> {
        let values: Option<Vec<T>> = ids.iter().map(|&i| row[i].finite().map(|v| offset + sign * v)).collect();
        Some(Self::new(ids, values?, base_id))
    }

    /// Builds from raw floats over the full sample.
    pub fn from_raw(ids: Window, raw: &[T], base_id: usize) -> Option<Self> {
        let values: Vec<T> = ids.iter().map(|&i| raw[i]).collect();
        if values.iter().all(|v| v.is_finite()) {
            Some(Self::new(ids, values, base_id))
        } else {
            None
        }
    }

    pub fn ids(&self) -> &Window {
        &self.ids
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }
    pub fn base_id(&self) -> usize {
        self.ids[self.base_pos]
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at a sample id, if it lies in the window.
    pub fn at(&self, id: usize) -> Option<T> {
        self.ids.iter().position(|&i| i == id).map(|p| self.values[p])
    }

    pub fn at_base(&self) -> T {
        self.values[self.base_pos]
    }

    pub fn same_window(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ids, &other.ids) || self.ids == other.ids
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        SampledFunction { ids: self.ids.clone(), values: self.values.iter().map(|&v| f(v)).collect(), base_pos: self.base_pos }
    }

    pub fn zip(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert!(self.same_window(other), "functions on different windows");
        SampledFunction {
            ids: self.ids.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            base_pos: self.base_pos,
        }
    }

    pub fn shift(&self, k: T) -> Self {
        self.map(|v| v + k)
    }

    pub fn with_base(&self, base_id: usize) -> Self {
        Self::new(self.ids.clone(), self.values.clone(), base_id)
    }

    pub fn sup(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn inf(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    /// `sup |f − g|` over the window.
    pub fn sup_distance(&self, other: &Self) -> T {
        self.zip(other, |a, b| (a - b).abs()).sup()
    }

    /// `sup (self − other)`.
    pub fn sup_minus(&self, other: &Self) -> T {
        self.zip(other, |a, b| a - b).sup()
    }

    /// `inf (self − other)`.
    pub fn inf_minus(&self, other: &Self) -> T {
        self.zip(other, |a, b| a - b).inf()
    }

    /// `self ≤ other + tol` everywhere.
    pub fn le(&self, other: &Self, tol: T) -> bool {
        self.sup_minus(other) <= tol
    }

    /// Sup-distance between the classes modulo constants, measured after
    /// normalizing both at the base point.
    pub fn class_distance(&self, other: &Self) -> T {
        let a = self.at_base();
        let b = other.at_base();
        self.zip(other, |x, y| ((x - a) - (y - b)).abs()).sup()
    }

    /// CSV rows `id,x,y,value` using `coords` for positions.
    pub fn to_csv(&self, coords: impl Fn(usize) -> [T; 2]) -> String {
        let mut out = String::from("id,x,y,value\n");
        for (&i, &v) in self.ids.iter().zip(&self.values) {
            let c = coords(i);
            let _ = writeln!(out, "{i},{},{},{}", to_f64(c[0]), to_f64(c[1]), to_f64(v));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Repr<'a> {
            ids: &'a [usize],
            values: Vec<f64>,
            base_id: usize,
        }
        serde_json::to_value(Repr { ids: &self.ids, values: self.values.iter().map(|v| to_f64(*v)).collect(), base_id: self.base_id() })
            .expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let w: Window = vec![3, 5, 9].into();
        let f = SampledFunction::new(w.clone(), vec![1.0, -2.0, 4.0], 5);
        let g = f.shift(2.5);
        assert_eq!(g.values(), &[3.5, 0.5, 6.5]);
        assert_eq!(f.class_distance(&g), 0.0);
        assert_eq!(f.sup_distance(&g), 2.5);
        assert_eq!(f.sup(), 4.0);
        assert_eq!(f.inf(), -2.0);
        assert_eq!(f.at(9), Some(4.0));
        assert_eq!(f.at_base(), -2.0);
        assert!(f.le(&g, 0.0));
    }

    #[test]
    fn infinite_rows_rejected() {
        let w: Window = vec![0, 1].into();
        let row = [Ext::Finite(1.0), Ext::Infinite];
        assert!(SampledFunction::from_row(w, &row, -1.0, 0.0, 0).is_none());
    }
}
