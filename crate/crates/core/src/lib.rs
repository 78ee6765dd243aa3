pub mod finite_field;
pub mod multiplier_lab;
pub mod phase_space;
pub mod quadrature;
pub mod symplectic_actions;
pub mod weyl_rep;
