//! CSV and JSON serialization of the shared data shapes.
//!
//! Schemas:
//! - cloud:         idx, x1..xD, a1..ad, is_boundary, component
//! - ghosts:        b_idx, k, x1..xD
//! - operator:      dense row-major values; JSON header {kind, N, B, epsilon}
//! - spectrum:      n, lambda, v_1..v_N
//! - prior samples: seed, zeta_1.., mu_1.., theta_1..theta_N
//! - observations:  obs_idx, y
//! - node function: idx, u
//! - chain:         zeta_1.., mu_1.. one row per stored sample, plus a JSON
//!   run manifest {seed, zeta, iterations, burn_in, acceptance_rate,
//!   preset_name}
//! - summary:       idx, mean, p025, p975
//! - calibration:   epsilon, log_epsilon, log_t, slope
//!
//! Numbers are written with Rust's shortest round-trip float formatting,
//! which makes artifacts byte-identical across runs of the same build.

use std::io::{Read, Write};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryComponent, GhostSet, GridInfo, PointCloud};
use crate::graph_ops::{Calibration, GraphOperator, SpectralDecomposition};
use crate::inference::{Chain, PosteriorSummary};
use crate::prior::PriorSample;
use crate::scalar::Scalar;

fn fmt<T: Scalar>(v: T) -> String {
    format!("{v}")
}

fn parse<T: Scalar>(field: &str, what: &'static str) -> Result<T> {
    field
        .trim()
        .parse::<f64>()
        .map(T::cast)
        .map_err(|_| Error::invalid(what, format!("cannot parse `{field}` as a number")))
}

fn parse_usize(field: &str, what: &'static str) -> Result<usize> {
    field
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::invalid(what, format!("cannot parse `{field}` as an index")))
}

/// Write a point cloud: `idx, x1..xD, a1..ad, is_boundary, component`.
pub fn write_cloud_csv<T: Scalar, W: Write>(writer: W, cloud: &PointCloud<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let d = cloud.intrinsic_dim();
    let dim = cloud.ambient_dim();
    let mut header = vec!["idx".to_string()];
    header.extend((1..=dim).map(|j| format!("x{j}")));
    header.extend((1..=d).map(|j| format!("a{j}")));
    header.push("is_boundary".into());
    header.push("component".into());
    w.write_record(&header)?;

    let mut component_of = vec![String::new(); cloud.len()];
    for component in &cloud.boundary_components {
        for &i in &component.idx {
            component_of[i] = component.label.clone();
        }
    }
    let mut is_boundary = vec![false; cloud.len()];
    for &i in &cloud.boundary_idx {
        is_boundary[i] = true;
    }
    for i in 0..cloud.len() {
        let mut record = vec![i.to_string()];
        record.extend(cloud.points.row(i).iter().map(|&v| fmt(v)));
        record.extend(cloud.intrinsic.row(i).iter().map(|&v| fmt(v)));
        record.push(if is_boundary[i] { "1".into() } else { "0".into() });
        record.push(component_of[i].clone());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a point cloud written by [`write_cloud_csv`]. Grid structure is not
/// part of the schema, so the result carries [`GridInfo::Irregular`].
pub fn read_cloud_csv<T: Scalar, R: Read>(reader: R) -> Result<PointCloud<T>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    let dim = headers.iter().filter(|h| h.starts_with('x')).count();
    let d = headers.iter().filter(|h| h.starts_with('a')).count();
    if dim == 0 || d == 0 {
        return Err(Error::invalid("cloud csv", "missing coordinate columns"));
    }
    let mut points_rows: Vec<Vec<T>> = Vec::new();
    let mut intrinsic_rows: Vec<Vec<T>> = Vec::new();
    let mut boundary_idx = Vec::new();
    let mut labels: Vec<(String, usize)> = Vec::new();
    for record in r.records() {
        let record = record?;
        let idx = parse_usize(&record[0], "cloud csv idx")?;
        let mut point = Vec::with_capacity(dim);
        for j in 0..dim {
            point.push(parse(&record[1 + j], "cloud csv coordinate")?);
        }
        let mut coords = Vec::with_capacity(d);
        for j in 0..d {
            coords.push(parse(&record[1 + dim + j], "cloud csv intrinsic")?);
        }
        let is_boundary = record[1 + dim + d].trim() == "1";
        if is_boundary {
            boundary_idx.push(idx);
            labels.push((record[2 + dim + d].to_string(), idx));
        }
        points_rows.push(point);
        intrinsic_rows.push(coords);
    }
    let n = points_rows.len();
    let mut points = Array2::zeros((n, dim));
    let mut intrinsic = Array2::zeros((n, d));
    for (i, row) in points_rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            points[[i, j]] = v;
        }
    }
    for (i, row) in intrinsic_rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            intrinsic[[i, j]] = v;
        }
    }
    let mut components: Vec<BoundaryComponent> = Vec::new();
    for (label, idx) in labels {
        match components.iter_mut().find(|c| c.label == label) {
            Some(c) => c.idx.push(idx),
            None => components.push(BoundaryComponent { label, idx: vec![idx] }),
        }
    }
    PointCloud::new(points, intrinsic, boundary_idx, components, GridInfo::Irregular)
}

/// Write ghost chains: `b_idx, k, x1..xD`.
pub fn write_ghosts_csv<T: Scalar, W: Write>(
    writer: W,
    ghosts: &GhostSet<T>,
    ambient_dim: usize,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["b_idx".to_string(), "k".to_string()];
    header.extend((1..=ambient_dim).map(|j| format!("x{j}")));
    w.write_record(&header)?;
    for chain in &ghosts.chains {
        for k in 0..ghosts.ghosts_per_point {
            let mut record = vec![chain.boundary_idx.to_string(), (k + 1).to_string()];
            record.extend(chain.ghosts.row(k).iter().map(|&v| fmt(v)));
            w.write_record(&record)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// JSON header of an operator export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorHeader {
    pub kind: String,
    pub n: usize,
    pub b: usize,
    pub epsilon: Option<f64>,
}

/// Write the dense matrix row-major, one CSV record per row (no header).
pub fn write_operator_csv<T: Scalar, W: Write>(writer: W, op: &GraphOperator<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in op.matrix.rows() {
        let record: Vec<String> = row.iter().map(|&v| fmt(v)).collect();
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Write the small JSON header `{kind, N, B, epsilon}`.
pub fn write_operator_header_json<T: Scalar, W: Write>(
    writer: W,
    op: &GraphOperator<T>,
) -> Result<()> {
    let header = OperatorHeader {
        kind: op.kind.as_str().to_string(),
        n: op.len(),
        b: op.block.as_ref().map(|b| b.boundary).unwrap_or(0),
        epsilon: op.epsilon.map(|e| e.to_f64_lossy()),
    };
    serde_json::to_writer_pretty(writer, &header)?;
    Ok(())
}

/// Write a spectrum: `n, lambda, v_1..v_N` with n starting at 1.
pub fn write_spectrum_csv<T: Scalar, W: Write>(
    writer: W,
    spectrum: &SpectralDecomposition<T>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let nodes = spectrum.nodes();
    let mut header = vec!["n".to_string(), "lambda".to_string()];
    header.extend((1..=nodes).map(|i| format!("v_{i}")));
    w.write_record(&header)?;
    for (k, &lambda) in spectrum.eigenvalues.iter().enumerate() {
        let mut record = vec![(k + 1).to_string(), fmt(lambda)];
        record.extend(spectrum.eigenvectors.column(k).iter().map(|&v| fmt(v)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Write prior samples: `seed, zeta_1.., mu_1.., theta_1..theta_N`.
pub fn write_prior_samples_csv<T: Scalar, W: Write>(
    writer: W,
    draws: &[(u64, PriorSample<T>)],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let Some((_, first)) = draws.first() else {
        return Err(Error::invalid("draws", "no samples to write"));
    };
    let mut header = vec!["seed".to_string()];
    header.extend((1..=first.zeta.len()).map(|i| format!("zeta_{i}")));
    header.extend((1..=first.mu.len()).map(|i| format!("mu_{i}")));
    header.extend((1..=first.theta.len()).map(|i| format!("theta_{i}")));
    w.write_record(&header)?;
    for (seed, sample) in draws {
        let mut record = vec![seed.to_string()];
        record.extend(sample.zeta.iter().map(|&v| fmt(v)));
        record.extend(sample.mu.iter().map(|&v| fmt(v)));
        record.extend(sample.theta.iter().map(|&v| fmt(v)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Write observations: `obs_idx, y`.
pub fn write_observations_csv<T: Scalar, W: Write>(
    writer: W,
    observation: &crate::forward::Observation<T>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["obs_idx", "y"])?;
    for (&idx, &y) in observation.obs_idx.iter().zip(observation.y.iter()) {
        w.write_record(&[idx.to_string(), fmt(y)])?;
    }
    w.flush()?;
    Ok(())
}

/// Read observations written by [`write_observations_csv`]; the noise
/// variance is not part of the schema and must be supplied.
pub fn read_observations_csv<T: Scalar, R: Read>(
    reader: R,
    noise_var: T,
) -> Result<crate::forward::Observation<T>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut obs_idx = Vec::new();
    let mut y = Vec::new();
    for record in r.records() {
        let record = record?;
        obs_idx.push(parse_usize(&record[0], "observations csv")?);
        y.push(parse(&record[1], "observations csv")?);
    }
    if !(noise_var > T::zero()) {
        return Err(Error::invalid("noise_var", "must be positive"));
    }
    Ok(crate::forward::Observation {
        y: Array1::from_vec(y),
        noise_var,
        obs_idx,
    })
}

/// Write a node function: `idx, u`.
pub fn write_node_function_csv<T: Scalar, W: Write>(writer: W, values: &Array1<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["idx", "u"])?;
    for (i, &v) in values.iter().enumerate() {
        w.write_record(&[i.to_string(), fmt(v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Read a node function written by [`write_node_function_csv`].
pub fn read_node_function_csv<T: Scalar, R: Read>(reader: R) -> Result<Array1<T>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for record in r.records() {
        let record = record?;
        let idx = parse_usize(&record[0], "node function csv")?;
        if idx != out.len() {
            return Err(Error::invalid(
                "node function csv",
                format!("expected idx {} but found {idx}", out.len()),
            ));
        }
        out.push(parse(&record[1], "node function csv")?);
    }
    Ok(Array1::from_vec(out))
}

/// Run metadata stored next to a chain export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainManifest {
    pub seed: u64,
    pub zeta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub acceptance_rate: f64,
    pub preset_name: String,
}

/// Write stored coefficient samples: header `zeta_1..zeta_m, mu_1..mu_L`,
/// one row per sample.
pub fn write_chain_csv<T: Scalar, W: Write>(
    writer: W,
    chain: &Chain<T>,
    interior_len: usize,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let Some(first) = chain.samples.first() else {
        return Err(Error::EmptyChain);
    };
    let dim = first.len();
    if interior_len > dim {
        return Err(Error::DimensionMismatch {
            what: "interior coefficient count",
            expected: dim,
            got: interior_len,
        });
    }
    let mut header: Vec<String> = (1..=interior_len).map(|i| format!("zeta_{i}")).collect();
    header.extend((1..=dim - interior_len).map(|i| format!("mu_{i}")));
    w.write_record(&header)?;
    for sample in &chain.samples {
        let record: Vec<String> = sample.iter().map(|&v| fmt(v)).collect();
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Read coefficient samples written by [`write_chain_csv`]; returns the
/// samples and the interior coefficient count recovered from the header.
pub fn read_chain_csv<T: Scalar, R: Read>(reader: R) -> Result<(Vec<Array1<T>>, usize)> {
    let mut r = csv::Reader::from_reader(reader);
    let interior_len = r
        .headers()?
        .iter()
        .filter(|h| h.starts_with("zeta_"))
        .count();
    let mut samples = Vec::new();
    for record in r.records() {
        let record = record?;
        let mut row = Vec::with_capacity(record.len());
        for field in record.iter() {
            row.push(parse(field, "chain csv")?);
        }
        samples.push(Array1::from_vec(row));
    }
    Ok((samples, interior_len))
}

/// Write a posterior summary: `idx, mean, p025, p975`.
pub fn write_summary_csv<T: Scalar, W: Write>(
    writer: W,
    summary: &PosteriorSummary<T>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["idx", "mean", "p025", "p975"])?;
    for i in 0..summary.mean.len() {
        w.write_record(&[
            i.to_string(),
            fmt(summary.mean[i]),
            fmt(summary.p025[i]),
            fmt(summary.p975[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Write a calibration table: `epsilon, log_epsilon, log_t, slope` with an
/// empty slope on the endpoint rows.
pub fn write_calibration_csv<T: Scalar, W: Write>(
    writer: W,
    calibration: &Calibration<T>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["epsilon", "log_epsilon", "log_t", "slope"])?;
    for row in &calibration.table {
        w.write_record(&[
            fmt(row.epsilon),
            fmt(row.log_epsilon),
            fmt(row.log_t),
            row.slope.map(fmt).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
