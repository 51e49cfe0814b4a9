// SPDX-License-Identifier: Apache-2.0

//! Sweeps call the same library routine thousands of times, and a warning
//! about the regime would repeat on every call. Each call site reports once.

use std::collections::HashSet;
use std::sync::Mutex;

use log::{Log, Metadata, Record};

struct OncePerSite {
    inner: env_logger::Logger,
    seen: Mutex<HashSet<(String, u32)>>,
}

impl Log for OncePerSite {
    fn enabled(&self, metadata: &Metadata) -> bool {
        self.inner.enabled(metadata)
    }

    fn log(&self, record: &Record) {
        if !self.inner.matches(record) {
            return;
        }
        let site = (record.file().unwrap_or(record.target()).to_owned(), record.line().unwrap_or(0));
        if self.seen.lock().expect("log lock").insert(site) {
            self.inner.log(record);
        }
    }

    fn flush(&self) {
        self.inner.flush();
    }
}

/// `RUST_LOG` filtering, defaulting to warnings.
pub fn init() {
    let inner = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).build();
    let level = inner.filter();
    if log::set_boxed_logger(Box::new(OncePerSite { inner, seen: Mutex::new(HashSet::new()) })).is_ok() {
        log::set_max_level(level);
    }
}
