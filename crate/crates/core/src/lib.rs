pub mod codec;
pub mod field;
pub mod harness;
pub mod ifg;
pub mod linalg;
pub mod params;
pub mod scalar;
pub mod tradeoff;

/// Exact rational used for all tradeoff arithmetic.
pub type Rational = num_rational::Ratio<i128>;

pub type Matrix8 = linalg::Matrix<field::Gf256>;
pub type Matrix16 = linalg::Matrix<field::Gf65536>;
pub type CodeSpec8 = codec::CodeSpec<field::Gf256>;
pub type CodeSpec16 = codec::CodeSpec<field::Gf65536>;
pub type ClusterState8 = codec::ClusterState<field::Gf256>;
pub type ClusterState16 = codec::ClusterState<field::Gf65536>;
pub type TradeoffPointF64 = params::TradeoffPoint<f64>;
