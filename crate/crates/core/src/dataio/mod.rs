//! File formats: quadrature series, result documents and delimited tables.

mod result;
mod series;
mod tables;

pub use result::{
    read_result, read_result_file, write_result, write_result_file, ContourInputs, CurveInputs,
    DataInputs, HistogramInputs, LabeledCurve, Record, ResultDocument, SeriesRef, SimulationInputs,
    SeriesSummary, SmaxInputs, SmaxOutputs, SmaxSource, StateInputs, CONVENTION,
    RESULT_SCHEMA_VERSION,
};
pub use series::{
    read_series, read_series_file, write_series, write_series_file, Encoding, Quadrature,
    QuadratureSeries, RunPair, PROVENANCE_KEYS, SERIES_FORMAT_VERSION,
};
pub use tables::{
    read_contour_csv, write_contour_csv, write_curve_csv, write_histogram_csv, write_scan_csv,
};
