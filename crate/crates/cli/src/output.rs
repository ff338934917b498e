use std::fmt::Write as _;
use std::path::Path;

use spin_wigner::PhasePoint;

pub const CSV_HEADER: &str = "theta,phi,value";

/// One row per point, `{:.16e}` so every double round-trips exactly.
pub fn field_csv(points: &[PhasePoint], values: &[f64]) -> String {
    let mut out = String::with_capacity(points.len() * 72);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (p, v) in points.iter().zip(values) {
        let s = &p.sites[0];
        writeln!(out, "{:.16e},{:.16e},{:.16e}", s.theta[0], s.phi[0], v).unwrap();
    }
    out
}

/// Heat map with a symmetric red-white-blue palette (blue positive) and a
/// black zero contour.
pub fn gnuplot_script(csv: &Path, title: &str, cols: usize, values: &[f64]) -> String {
    let name = csv
        .file_name()
        .map(|n| n.to_string_lossy())
        .unwrap_or_default();
    let bound = values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    // pm3d needs blank lines between scans; the CSV has none.
    let data = format!("< awk 'NR>1{{print; if ((NR-1)%{cols}==0) print \"\"}}' '{name}'");
    format!(
        "set datafile separator ','\n\
         set title '{title}'\n\
         set xlabel 'phi'\n\
         set ylabel 'theta'\n\
         set view map\n\
         set pm3d at b\n\
         unset surface\n\
         set contour base\n\
         set cntrparam levels discrete 0\n\
         set palette defined (-1 'red', 0 'white', 1 'blue')\n\
         set cbrange [{neg:.6e}:{bound:.6e}]\n\
         set key off\n\
         splot \"{data}\" using 2:1:3 with pm3d, \\\n    \"{data}\" using 2:1:3 with lines lc rgb 'black'\n",
        neg = -bound,
        data = data.replace('"', "\\\""),
    )
}
