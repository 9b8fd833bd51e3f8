//! Monotone functions between powersets of finite universes.

use std::fmt;
use std::sync::Arc;

use crate::mv::{same_universe, SubsetY, Universe};

type SetMap = dyn Fn(&SubsetY) -> SubsetY + Send + Sync;

/// A monotone map `P(Y) → P(Z)`, stored as a shareable closure.
#[derive(Clone)]
pub struct SetFn {
    dom: Arc<Universe>,
    cod: Arc<Universe>,
    map: Arc<SetMap>,
}

impl fmt::Debug for SetFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetFn(|Y|={}, |Z|={})", self.dom.len(), self.cod.len())
    }
}

impl SetFn {
    pub fn new<F>(dom: &Arc<Universe>, cod: &Arc<Universe>, map: F) -> SetFn
    where
        F: Fn(&SubsetY) -> SubsetY + Send + Sync + 'static,
    {
        SetFn { dom: dom.clone(), cod: cod.clone(), map: Arc::new(map) }
    }

    /// The constant map onto `∅`.
    pub fn empty(dom: &Arc<Universe>, cod: &Arc<Universe>) -> SetFn {
        let cod2 = cod.clone();
        SetFn::new(dom, cod, move |_| SubsetY::empty(&cod2))
    }

    pub fn identity(dom: &Arc<Universe>) -> SetFn {
        SetFn::new(dom, dom, |s| s.clone())
    }

    pub fn domain(&self) -> &Arc<Universe> {
        &self.dom
    }

    pub fn codomain(&self) -> &Arc<Universe> {
        &self.cod
    }

    /// Panics when `s` is not a subset of the domain universe.
    pub fn apply(&self, s: &SubsetY) -> SubsetY {
        assert!(same_universe(s.universe(), &self.dom), "set-function applied outside its domain");
        (self.map)(s)
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &SetFn) -> SetFn {
        assert!(same_universe(&self.cod, &next.dom), "set-function composition mismatch");
        let (f, g) = (self.clone(), next.clone());
        SetFn::new(&self.dom, &next.cod, move |s| g.apply(&f.apply(s)))
    }

    /// `Y′ ↦ self(Y′) ∩ mask`.
    pub fn restrict_image(&self, mask: &SubsetY) -> SetFn {
        let (f, m) = (self.clone(), mask.clone());
        SetFn::new(&self.dom, &self.cod, move |s| f.apply(s).intersection(&m))
    }

    /// `Y′ ↦ self(Y′ ∩ mask)`.
    pub fn restrict_input(&self, mask: &SubsetY) -> SetFn {
        let (f, m) = (self.clone(), mask.clone());
        SetFn::new(&self.dom, &self.cod, move |s| f.apply(&s.intersection(&m)))
    }
}
