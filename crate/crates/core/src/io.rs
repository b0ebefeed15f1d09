//! CSV input and output. Every file has a header row; missing or
//! non-numeric cells are errors that name the row and column.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::em::{ComponentParams, MixtureFit};
use crate::error::{AsprError, Result};
use crate::linalg::SpdMatrix;
use crate::model::summary::{parameter_table, SummaryRow};
use crate::model::PosteriorSamples;

/// Shortest round-trip text for a value; integers print without a fraction
/// and very large or small magnitudes in exponent form.
pub fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:?}")
    }
}

fn with_path<T>(path: &Path, r: std::result::Result<T, csv::Error>) -> Result<T> {
    r.map_err(|e| AsprError::Data(format!("{}: {e}", path.display())))
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    with_path(
        path,
        csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path),
    )
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    with_path(path, csv::Writer::from_path(path))
}

/// Reads a numeric table. Rows are numbered from 1 after the header.
pub fn read_table_csv(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut reader = reader(path)?;
    let names: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if names.is_empty() {
        return Err(AsprError::Data(format!("{}: no columns", path.display())));
    }
    let mut values = Vec::new();
    let mut rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != names.len() {
            return Err(AsprError::Data(format!(
                "{}: row {} has {} fields, header has {}",
                path.display(),
                r + 1,
                record.len(),
                names.len()
            )));
        }
        for (c, cell) in record.iter().enumerate() {
            if cell.is_empty()
                || cell.eq_ignore_ascii_case("na")
                || cell.eq_ignore_ascii_case("nan")
            {
                return Err(AsprError::Data(format!(
                    "{}: missing value at row {}, column '{}'",
                    path.display(),
                    r + 1,
                    names[c]
                )));
            }
            let v: f64 = cell.parse().map_err(|_| {
                AsprError::Data(format!(
                    "{}: non-numeric value '{cell}' at row {}, column '{}'",
                    path.display(),
                    r + 1,
                    names[c]
                ))
            })?;
            values.push(v);
        }
        rows += 1;
    }
    Ok((
        names.clone(),
        DMatrix::from_row_slice(rows, names.len(), &values),
    ))
}

pub fn write_table_csv(path: &Path, names: &[String], table: &DMatrix<f64>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(names)?;
    for i in 0..table.nrows() {
        w.write_record(table.row(i).iter().map(|&v| fmt_num(v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Two-column file of predictor-name pairs for interaction terms.
pub fn read_pairs_csv(path: &Path) -> Result<Vec<(String, String)>> {
    let mut reader = reader(path)?;
    let mut out = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        match (record.get(0), record.get(1)) {
            (Some(a), Some(b)) if !a.is_empty() && !b.is_empty() => {
                out.push((a.to_string(), b.to_string()))
            }
            _ => {
                return Err(AsprError::Data(format!(
                    "{}: row {} needs two names",
                    path.display(),
                    r + 1
                )))
            }
        }
    }
    Ok(out)
}

/// One row per stored draw. `z[i]` columns (1 = adverse) are appended when
/// `include_z` is set and allocations were kept.
pub fn write_samples_csv(path: &Path, samples: &PosteriorSamples, include_z: bool) -> Result<()> {
    let (mut names, table) = parameter_table(samples);
    let with_z = include_z && !samples.z.is_empty();
    let n = samples.z.first().map_or(0, Vec::len);
    if with_z {
        names.extend((1..=n).map(|i| format!("z[{i}]")));
    }
    let mut w = writer(path)?;
    w.write_record(&names)?;
    for d in 0..table.nrows() {
        let mut rec: Vec<String> = table.row(d).iter().map(|&v| fmt_num(v)).collect();
        if with_z {
            rec.extend(
                samples.z[d]
                    .iter()
                    .map(|&z| if z { "1" } else { "0" }.to_string()),
            );
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_samples_csv`].
pub fn read_samples_csv(path: &Path) -> Result<PosteriorSamples> {
    let (names, table) = read_table_csv(path)?;
    let g = table.nrows();
    let s = names.iter().filter(|n| n.starts_with("theta[1][")).count();
    if s == 0 {
        return Err(AsprError::Data(format!(
            "{}: no theta columns",
            path.display()
        )));
    }
    let col = |name: &str| {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| AsprError::Data(format!("{}: missing column '{name}'", path.display())))
    };
    let mut components = Vec::with_capacity(g);
    for d in 0..g {
        let mut pair = Vec::with_capacity(2);
        for h in 1..=2 {
            let mut m = nalgebra::DVector::zeros(s);
            for k in 0..s {
                m[k] = table[(d, col(&format!("theta[{h}][{}]", k + 1))?)];
            }
            let mut cov = DMatrix::zeros(s, s);
            for k in 0..s {
                for l in k..s {
                    let v = table[(d, col(&format!("Sigma[{h}][{}][{}]", k + 1, l + 1))?)];
                    cov[(k, l)] = v;
                    cov[(l, k)] = v;
                }
            }
            pair.push(ComponentParams::new(m, SpdMatrix::new(cov)?)?);
        }
        let b = pair.pop().expect("two components");
        let a = pair.pop().expect("two components");
        components.push([a, b]);
    }
    let gamma: Vec<f64> = table.column(col("gamma")?).iter().copied().collect();
    let omega1_bar: Vec<f64> = table.column(col("omega1_bar")?).iter().copied().collect();
    let beta_cols: Vec<usize> = (0..names.len())
        .filter(|&c| names[c].starts_with("beta["))
        .collect();
    let predictor_names = beta_cols
        .iter()
        .map(|&c| names[c]["beta[".len()..names[c].len() - 1].to_string())
        .collect();
    let beta = DMatrix::from_fn(g, beta_cols.len(), |d, j| table[(d, beta_cols[j])]);
    let z_cols: Vec<usize> = (0..names.len())
        .filter(|&c| names[c].starts_with("z["))
        .collect();
    let z = if z_cols.is_empty() {
        Vec::new()
    } else {
        (0..g)
            .map(|d| z_cols.iter().map(|&c| table[(d, c)] == 1.0).collect())
            .collect()
    };
    Ok(PosteriorSamples {
        outcome_names: (1..=s).map(|k| format!("y{k}")).collect(),
        predictor_names,
        components,
        gamma,
        beta,
        omega1_bar,
        z,
        minority_fraction: Vec::new(),
        max_tail_weight: f64::NAN,
    })
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "parameter",
        "mean",
        "sd",
        "q2.5",
        "q5",
        "q50",
        "q95",
        "q97.5",
    ])?;
    for r in rows {
        w.write_record([
            r.name.clone(),
            fmt_num(r.mean),
            fmt_num(r.sd),
            fmt_num(r.q025),
            fmt_num(r.q05),
            fmt_num(r.q50),
            fmt_num(r.q95),
            fmt_num(r.q975),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `name,value` rows, e.g. per-predictor effect probabilities.
pub fn write_named_values_csv(
    path: &Path,
    header: [&str; 2],
    names: &[String],
    values: &[f64],
) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for (n, v) in names.iter().zip(values) {
        w.write_record([n.clone(), fmt_num(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// `parameter,value` rows: the adverse weight, then means and covariance
/// entries of each component (1 = adverse), then the log-likelihood.
pub fn write_em_fit_csv(path: &Path, fit: &MixtureFit) -> Result<()> {
    let file =
        File::create(path).map_err(|e| AsprError::Data(format!("{}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "parameter,value")?;
    writeln!(out, "weight,{}", fmt_num(fit.weight))?;
    for (h, c) in fit.components.iter().enumerate() {
        let s = c.dim();
        for k in 0..s {
            writeln!(out, "theta[{}][{}],{}", h + 1, k + 1, fmt_num(c.mean[k]))?;
        }
        for k in 0..s {
            for l in k..s {
                writeln!(
                    out,
                    "Sigma[{}][{}][{}],{}",
                    h + 1,
                    k + 1,
                    l + 1,
                    fmt_num(c.cov.matrix()[(k, l)])
                )?;
            }
        }
    }
    writeln!(out, "loglik,{}", fmt_num(fit.loglik()))?;
    writeln!(out, "converged,{}", u8::from(fit.converged))?;
    writeln!(out, "iterations,{}", fit.n_iter)?;
    out.flush()?;
    Ok(())
}

/// Reads the components from a file written by [`write_em_fit_csv`].
pub fn read_em_fit_csv(path: &Path) -> Result<[ComponentParams; 2]> {
    let mut reader = reader(path)?;
    let mut values = std::collections::HashMap::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let (Some(k), Some(v)) = (record.get(0), record.get(1)) else {
            return Err(AsprError::Data(format!(
                "{}: row {} needs two fields",
                path.display(),
                r + 1
            )));
        };
        let v: f64 = v.parse().map_err(|_| {
            AsprError::Data(format!(
                "{}: non-numeric value '{v}' at row {}, column 'value'",
                path.display(),
                r + 1
            ))
        })?;
        values.insert(k.to_string(), v);
    }
    let s = (1..)
        .take_while(|k| values.contains_key(&format!("theta[1][{k}]")))
        .count();
    if s == 0 {
        return Err(AsprError::Data(format!(
            "{}: no theta rows",
            path.display()
        )));
    }
    let get = |key: String| {
        values.get(&key).copied().ok_or_else(|| {
            AsprError::Data(format!("{}: missing parameter '{key}'", path.display()))
        })
    };
    let mut out = Vec::with_capacity(2);
    for h in 1..=2 {
        let mut mean = nalgebra::DVector::zeros(s);
        let mut cov = DMatrix::zeros(s, s);
        for k in 0..s {
            mean[k] = get(format!("theta[{h}][{}]", k + 1))?;
            for l in k..s {
                let v = get(format!("Sigma[{h}][{}][{}]", k + 1, l + 1))?;
                cov[(k, l)] = v;
                cov[(l, k)] = v;
            }
        }
        out.push(ComponentParams::new(mean, SpdMatrix::new(cov)?)?);
    }
    let healthy = out.pop().expect("two components");
    let adverse = out.pop().expect("two components");
    Ok([adverse, healthy])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trip_and_missing_cells() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let names = vec!["a".to_string(), "b".to_string()];
        let m = DMatrix::from_row_slice(2, 2, &[1.5, -2.0, 0.1, 3e10]);
        write_table_csv(&p, &names, &m).unwrap();
        let (n2, m2) = read_table_csv(&p).unwrap();
        assert_eq!(n2, names);
        assert_eq!(m2, m);
        assert_eq!(fmt_num(3.0), "3");
        assert_eq!(fmt_num(5.2e-9), "5.2e-9");
        assert_eq!(fmt_num(0.25).parse::<f64>().unwrap(), 0.25);
        let missing = read_table_csv(&dir.path().join("none.csv"))
            .unwrap_err()
            .to_string();
        assert!(missing.contains("none.csv"), "{missing}");
        std::fs::write(&p, "a,b\n1,2\n3,\n").unwrap();
        let err = read_table_csv(&p).unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("'b'"), "{err}");
        std::fs::write(&p, "a,b\n1,x\n").unwrap();
        assert!(read_table_csv(&p)
            .unwrap_err()
            .to_string()
            .contains("non-numeric"));
    }

    #[test]
    fn pairs_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pairs.csv");
        std::fs::write(&p, "left,right\nsnp1,lead\n").unwrap();
        assert_eq!(
            read_pairs_csv(&p).unwrap(),
            vec![("snp1".to_string(), "lead".to_string())]
        );
        std::fs::write(&p, "left,right\nsnp1,\n").unwrap();
        assert!(read_pairs_csv(&p).is_err());
    }

    #[test]
    fn em_fit_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("fit.csv");
        let mut rng = crate::rng::RngStream::new(5, 0);
        let y = DMatrix::from_fn(200, 2, |i, _| {
            let shift = if i < 30 { -4.0 } else { 0.0 };
            shift + crate::dist::std_normal(&mut rng)
        });
        let fit =
            crate::em::em_fit(&y, &Default::default(), &crate::rng::RngStream::new(1, 0)).unwrap();
        write_em_fit_csv(&p, &fit).unwrap();
        let back = read_em_fit_csv(&p).unwrap();
        for h in 0..2 {
            assert_eq!(back[h].mean, fit.components[h].mean);
            assert_eq!(back[h].cov.matrix(), fit.components[h].cov.matrix());
        }
    }
}
