#![allow(dead_code)]

use tte3o_core::DesignSpec;

/// One row of the published three-outcome design table (1:1 allocation).
#[derive(Debug, Clone, Copy)]
pub struct TableRow {
    pub spec: DesignSpec,
    pub d: u64,
    pub hr_lower: f64,
    pub hr_upper: f64,
    /// Decimal places printed for each boundary.
    pub lower_places: usize,
    pub upper_places: usize,
}

fn places(cell: &str) -> usize {
    cell.split('.').nth(1).map_or(0, str::len)
}

pub fn table1() -> Vec<TableRow> {
    let text = include_str!("../data/table1.csv");
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            let num = |i: usize| cells[i].parse::<f64>().unwrap();
            TableRow {
                spec: DesignSpec::new(num(0), num(1), num(2), num(3), num(5), num(4), 1.0),
                d: cells[6].parse().unwrap(),
                hr_lower: num(7),
                hr_upper: num(8),
                lower_places: places(cells[7]),
                upper_places: places(cells[8]),
            }
        })
        .collect()
}

/// ±1 unit in the last printed digit.
pub fn display_tolerance(places: usize) -> f64 {
    10f64.powi(-(places as i32)) * 1.000_001
}
