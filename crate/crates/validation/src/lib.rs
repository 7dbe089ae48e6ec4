//! Holds the `acceptance` test target. Run it with
//! `cargo test -p chartdesc-validation --test acceptance`; it expects the
//! `chartdesc` binary to be built (a workspace-wide `cargo test` does that).
