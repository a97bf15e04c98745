#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// A scratch git repository with a fixed identity and caller-chosen dates.
pub struct GitRepo {
    pub dir: TempDir,
}

impl GitRepo {
    pub fn new() -> Self {
        let repo = GitRepo {
            dir: tempfile::tempdir().expect("tempdir"),
        };
        repo.git(&["init", "-q", "-b", "main"]);
        repo.git(&["config", "user.name", "Fixture"]);
        repo.git(&["config", "user.email", "fixture@example.invalid"]);
        repo.git(&["config", "commit.gpgsign", "false"]);
        repo
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn git(&self, args: &[&str]) -> String {
        self.git_at(args, "2020-01-01T00:00:00Z")
    }

    pub fn git_at(&self, args: &[&str], date: &str) -> String {
        let out = Command::new("git")
            .args(args)
            .current_dir(self.path())
            .env("GIT_AUTHOR_DATE", date)
            .env("GIT_COMMITTER_DATE", date)
            .env("GIT_CONFIG_NOSYSTEM", "1")
            .env("HOME", self.path())
            .output()
            .expect("run git");
        assert!(out.status.success(), "git {args:?}: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8_lossy(&out.stdout).into_owned()
    }

    pub fn write(&self, rel: &str, content: &str) {
        let path = self.path().join(rel);
        std::fs::create_dir_all(path.parent().expect("parent")).expect("mkdir");
        std::fs::write(path, content).expect("write");
    }

    pub fn remove(&self, rel: &str) {
        std::fs::remove_file(self.path().join(rel)).expect("remove");
    }

    /// Stage everything and commit at `date` (RFC 3339).
    pub fn commit(&self, message: &str, date: &str) -> String {
        self.git_at(&["add", "-A"], date);
        self.git_at(&["commit", "-q", "--allow-empty", "-m", message], date);
        self.git(&["rev-parse", "HEAD"]).trim().to_string()
    }
}

/// A small history: an On-hold comment introduced and later removed, a
/// cross-reference that stays, a test file that is ignored, and a merged
/// side branch.
pub fn sample_repo() -> GitRepo {
    let repo = GitRepo::new();
    repo.write(
        "src/main/java/org/example/Fs.java",
        "package org.example;\n\
         class Fs {\n\
         \x20 /* return type will change to AFS once HADOOP-6223 is completed */\n\
         \x20 Object get() { return null; }\n\
         \x20 // see HADOOP-1230 for the background\n\
         \x20 String s = \"// HADOOP-9 inside a string\";\n\
         }\n",
    );
    repo.write(
        "src/test/java/org/example/FsTest.java",
        "class FsTest {\n  // TODO remove after HADOOP-77\n}\n",
    );
    repo.commit("initial", "2020-01-10T08:00:00Z");

    repo.git(&["checkout", "-q", "-b", "side"]);
    repo.write(
        "src/main/java/org/example/Side.java",
        "class Side {\n  // workaround until HADOOP-11938 is fixed\n}\n",
    );
    repo.commit("side work", "2020-02-01T08:00:00Z");
    repo.git(&["checkout", "-q", "main"]);
    repo.write("README.md", "readme\n");
    repo.commit("docs", "2020-02-02T08:00:00Z");
    repo.git_at(&["merge", "-q", "--no-ff", "side", "-m", "merge side"], "2020-02-03T08:00:00Z");

    repo.write(
        "src/main/java/org/example/Fs.java",
        "package org.example;\n\
         class Fs {\n\
         \x20 AbstractFileSystem get() { return null; }\n\
         \x20 // see HADOOP-1230 for the background\n\
         }\n",
    );
    repo.commit("use AFS", "2020-03-23T17:00:00Z");
    repo
}
