//! Sweep grids on the command line: `start:stop:steps` for an inclusive
//! linear grid, or an explicit comma-separated list.

use anyhow::{bail, Context, Result};

pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let grid = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, steps] = parts[..] else {
            bail!("grid `{text}`: expected start:stop:steps");
        };
        let start: f64 = start.trim().parse().with_context(|| format!("grid start `{start}`"))?;
        let stop: f64 = stop.trim().parse().with_context(|| format!("grid stop `{stop}`"))?;
        let steps: usize = steps.trim().parse().with_context(|| format!("grid steps `{steps}`"))?;
        match steps {
            0 => bail!("grid `{text}`: at least one step is needed"),
            1 => vec![start],
            n => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        text.split(',')
            .map(|v| v.trim().parse::<f64>().with_context(|| format!("grid value `{v}`")))
            .collect::<Result<Vec<_>>>()?
    };
    check_grid(&grid)?;
    Ok(grid)
}

/// Nonempty, finite and strictly monotone in one direction.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        bail!("grid is empty");
    }
    if let Some(v) = grid.iter().find(|v| !v.is_finite()) {
        bail!("grid value {v} is not finite");
    }
    let up = grid.windows(2).all(|w| w[1] > w[0]);
    let down = grid.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        bail!("grid must be strictly monotone");
    }
    Ok(())
}
