//! True trees of Shabat polynomials and conformally balanced tree
//! approximation of planar continua.

pub mod geom_tree;
pub mod plane_tree;
pub mod poly;
pub mod grid_approx;
pub mod svg;
pub mod harmonic;
pub mod io;
pub mod shabat;
pub mod tracer;
pub mod balancer;
pub mod pipeline;
pub mod shapes;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/plane-trees.md")]
    mod plane_trees {}
    #[doc = include_str!("../../../book/src/shabat.md")]
    mod shabat {}
    #[doc = include_str!("../../../book/src/tracing.md")]
    mod tracing {}
    #[doc = include_str!("../../../book/src/grid.md")]
    mod grid {}
    #[doc = include_str!("../../../book/src/harmonic.md")]
    mod harmonic {}
    #[doc = include_str!("../../../book/src/balancing.md")]
    mod balancing {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
