use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn aircast(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aircast"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("AIRCAST_OUT")
        .output()
        .expect("run aircast")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn simulate(out: &Path, extra: &[&str]) -> PathBuf {
    let mut args = vec!["simulate"];
    args.extend_from_slice(extra);
    let o = aircast(&args, out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out.join("simulated.csv")
}

fn ingest(out: &Path, input: &Path) {
    let o = aircast(&["ingest", "--input", input.to_str().unwrap()], out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn ingest_writes_station_series() {
    let tmp = TempDir::new().unwrap();
    let input = write(
        tmp.path(),
        "in.csv",
        "station,timestamp,pollutant,value\n\
         Gitega,2021-03-01T00:00:00+02:00,PM2.5,10\n\
         Gitega,2021-03-01T01:00:00+02:00,PM2.5,12\n\
         Mount Kigali,2021-03-01T00:30:00+02:00,PM2.5,30\n\
         Gitega,not-a-time,PM2.5,1\n",
    );
    let out = tmp.path().join("out");
    ingest(&out, &input);
    for f in ["gitega_hourly.csv", "gitega_daily.csv", "mount_kigali_hourly.csv", "index.json"] {
        assert!(out.join("series").join(f).exists(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("ingest_report.json")).unwrap()).unwrap();
    assert_eq!(report["rows_read"], 4);
    assert_eq!(report["rows_accepted"], 3);
    assert_eq!(report["rejects"][0]["line"], 5);
}

#[test]
fn ingest_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let missing = tmp.path().join("nope.csv");
    assert_eq!(code(&aircast(&["ingest", "--input", missing.to_str().unwrap()], &out)), 1);

    let header_only = write(tmp.path(), "h.csv", "station,timestamp,pollutant,value\n");
    assert_eq!(code(&aircast(&["ingest", "--input", header_only.to_str().unwrap()], &out)), 3);

    let bad_schema = write(tmp.path(), "b.csv", "site,timestamp,pollutant,value\nx,2021-01-01T00:00:00Z,PM25,1\n");
    assert_eq!(code(&aircast(&["ingest", "--input", bad_schema.to_str().unwrap()], &out)), 2);

    assert_eq!(code(&aircast(&["ingest", "--bogus-flag"], &out)), 2);
}

#[test]
fn trend_outputs_and_threshold() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let input = simulate(&out, &["--days", "60", "--station", "Gitega"]);
    ingest(&out, &input);
    let o = aircast(&["trend", "--who-threshold", "25"], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let files: Vec<String> = fs::read_dir(out.join("trend"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("gitega_"))
        .collect();
    assert_eq!(files.len(), 5, "{files:?}");
    let exceed = fs::read_to_string(out.join("trend").join("gitega_who_exceedance.csv")).unwrap();
    let row = exceed.lines().nth(1).unwrap();
    assert_eq!(row.split(',').nth(2), Some("25"));

    assert_eq!(code(&aircast(&["trend", "--station", "Nowhere"], &out)), 3);
}

#[test]
fn trend_names_peak_weekday() {
    let tmp = TempDir::new().unwrap();
    let mut text = String::from("station,timestamp,pollutant,value\n");
    // 2021-03-01 is a Monday; Wednesdays are much dirtier
    let start = chrono::NaiveDate::from_ymd_opt(2021, 3, 1).unwrap();
    for d in 0..56 {
        let date = start + chrono::Duration::days(d);
        let v = if d % 7 == 2 { 80.0 } else { 20.0 + (d % 5) as f64 };
        for h in 0..24 {
            text.push_str(&format!("Kiyovu,{}T{h:02}:00:00+02:00,PM25,{v}\n", date.format("%Y-%m-%d")));
        }
    }
    let input = write(tmp.path(), "w.csv", &text);
    let out = tmp.path().join("out");
    ingest(&out, &input);
    assert_eq!(code(&aircast(&["trend", "--format", "json"], &out)), 0);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("trend").join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["ranking"][0]["peak_weekday"], "Wednesday");
    assert!(out.join("trend").join("kiyovu_calendar.json").exists());
}

#[test]
fn forecast_tracks() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let input = simulate(&out, &["--days", "90", "--station", "Gitega"]);
    ingest(&out, &input);

    let o = aircast(&["forecast", "--models", "arima", "--horizon", "5"], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("forecast").join("gitega_forecast.csv")).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(out.join("models").join("gitega_arima.json").exists());

    let o = aircast(&["forecast", "--models", "arima,ann,gp", "--horizon", "4"], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("forecast").join("gitega_forecast.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("timestamp,actual,arima,ann,gp,gp_variance"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r.len(), 6);
        assert!(r[2..].iter().all(|v| v.parse::<f64>().is_ok()));
    }
    for m in ["ann", "gp"] {
        assert!(out.join("models").join(format!("gitega_{m}.json")).exists());
    }

    assert_eq!(code(&aircast(&["forecast", "--horizon", "0"], &out)), 2);
}

#[test]
fn evaluate_table_layout_and_determinism() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let input = simulate(&out, &["--days", "80", "--station", "Gitega,Kiyovu"]);
    ingest(&out, &input);

    let o = aircast(&["evaluate", "--seed", "3"], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = out.join("evaluation").join("table.csv");
    let first = fs::read(&table).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "station,RMSE_ARIMA,RMSE_ANN,RMSE_GPR,MAE_ARIMA,MAE_ANN,MAE_GPR");
    assert_eq!(lines.len(), 3);
    for l in &lines[1..] {
        let cells: Vec<&str> = l.split(',').collect();
        assert_eq!(cells.len(), 7);
        for k in 0..3 {
            let (r, m): (f64, f64) = (cells[1 + k].parse().unwrap(), cells[4 + k].parse().unwrap());
            assert!(r >= m);
        }
    }
    assert!(out.join("evaluation").join("report.json").exists());

    assert_eq!(code(&aircast(&["evaluate", "--seed", "3"], &out)), 0);
    assert_eq!(fs::read(&table).unwrap(), first);

    assert_eq!(code(&aircast(&["evaluate", "--models", "arima"], &out)), 0);
    let text = fs::read_to_string(&table).unwrap();
    assert_eq!(text.lines().next(), Some("station,RMSE_ARIMA,MAE_ARIMA"));
}

#[test]
fn evaluate_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let input = simulate(&out, &["--days", "30", "--station", "Gitega"]);
    ingest(&out, &input);
    // ten training days cannot carry a (9,1,0) model
    let o = aircast(&["evaluate", "--holdout", "20", "--models", "arima", "--arima-order", "9,1,0"], &out);
    assert_eq!(code(&o), 4);
    let o = aircast(&["evaluate", "--holdout", "22", "--models", "arima"], &out);
    assert_eq!(code(&o), 2);
}

#[test]
fn simulate_roster_and_validation() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    simulate(&a, &["--days", "20"]);
    simulate(&b, &["--days", "20"]);
    let text = fs::read_to_string(a.join("simulated.csv")).unwrap();
    let stations: std::collections::BTreeSet<&str> =
        text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(stations.len(), 9);
    for s in aircast::ingest::STATION_ROSTER {
        assert!(stations.contains(s), "{s}");
    }
    assert_eq!(fs::read(a.join("simulated.csv")).unwrap(), fs::read(b.join("simulated.csv")).unwrap());

    assert_eq!(code(&aircast(&["simulate", "--beta", "1.1"], &tmp.path().join("c"))), 2);
    assert_eq!(code(&aircast(&["simulate", "--sigma", "-1"], &tmp.path().join("c"))), 2);
}

#[test]
fn output_directory_from_environment() {
    let tmp = TempDir::new().unwrap();
    let work = tmp.path().join("cwd");
    fs::create_dir_all(&work).unwrap();
    let out = tmp.path().join("env-out");
    let o = Command::new(env!("CARGO_BIN_EXE_aircast"))
        .args(["simulate", "--days", "5", "--station", "Rebero"])
        .env("AIRCAST_OUT", &out)
        .current_dir(&work)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(out.join("simulated.csv").exists());
    // nothing lands in the working directory
    assert_eq!(fs::read_dir(&work).unwrap().count(), 0);
}
