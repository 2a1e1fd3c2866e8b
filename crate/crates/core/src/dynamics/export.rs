use std::io::Write;

use super::DynamicsError;
use crate::observables::ObservableRecord;

fn field(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn export_err(e: impl std::fmt::Display) -> DynamicsError {
    DynamicsError::Export(e.to_string())
}

/// Observable series, one row per record. Observers that were not enabled
/// leave their fields empty.
pub fn write_observables_csv<W: Write>(out: W, records: &[ObservableRecord]) -> Result<(), DynamicsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "time",
        "mass",
        "energy",
        "kinetic",
        "momentum",
        "F",
        "orbital_distance",
        "orbital_c",
        "orbital_theta",
    ])
    .map_err(export_err)?;
    for r in records {
        w.write_record([
            r.time.to_string(),
            r.mass.to_string(),
            r.energy.to_string(),
            r.kinetic.to_string(),
            r.momentum.to_string(),
            field(r.f),
            field(r.orbital.map(|o| o.distance)),
            field(r.orbital.map(|o| o.c)),
            field(r.orbital.map(|o| o.theta)),
        ])
        .map_err(export_err)?;
    }
    w.flush().map_err(export_err)
}

/// Per-edge mass and `|u|²` centroid at every record (`centroid` empty on an
/// edge without mass).
pub fn write_edge_series_csv<W: Write>(out: W, records: &[ObservableRecord]) -> Result<(), DynamicsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "edge_id", "mass", "centroid"]).map_err(export_err)?;
    for r in records {
        for (e, (m, c)) in r.edge_masses.iter().zip(&r.edge_centroids).enumerate() {
            w.write_record([r.time.to_string(), e.to_string(), m.to_string(), field(*c)]).map_err(export_err)?;
        }
    }
    w.flush().map_err(export_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::Orbital;

    #[test]
    fn absent_observers_leave_empty_fields() {
        let mut r = ObservableRecord {
            time: 0.5,
            mass: 2.0,
            energy: -0.25,
            kinetic: 0.125,
            momentum: 0.0,
            f: None,
            orbital: None,
            edge_masses: vec![2.0, 0.0],
            edge_centroids: vec![Some(3.5), None],
        };
        let mut buf = Vec::new();
        write_observables_csv(&mut buf, &[r.clone()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "0.5,2,-0.25,0.125,0,,,,");
        r.f = Some(1.5);
        r.orbital = Some(Orbital { distance: 0.01, theta: 0.5, c: 20.0 });
        let mut buf = Vec::new();
        write_observables_csv(&mut buf, &[r.clone()]).unwrap();
        assert!(String::from_utf8(buf).unwrap().ends_with(",1.5,0.01,20,0.5\n"));
        let mut buf = Vec::new();
        write_edge_series_csv(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().collect::<Vec<_>>(), ["time,edge_id,mass,centroid", "0.5,0,2,3.5", "0.5,1,0,"]);
    }
}
