use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geo::{frame_stem, Timestep};
use crate::vri::Aspect;

/// File names inside a pipeline output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputLayout {
    root: PathBuf,
}

impl OutputLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn model(&self) -> PathBuf {
        self.root.join("model.json")
    }

    pub fn trajectory(&self) -> PathBuf {
        self.root.join("trajectory.csv")
    }

    pub fn occupancy(&self) -> PathBuf {
        self.root.join("occupancy.csv")
    }

    pub fn unplaced(&self) -> PathBuf {
        self.root.join("unplaced.csv")
    }

    pub fn gps_trajectories(&self) -> PathBuf {
        self.root.join("gps_trajectories.csv")
    }

    pub fn report(&self, stage: &str) -> PathBuf {
        self.root.join("reports").join(format!("{stage}.json"))
    }

    fn layer_name(aspect: Aspect, t: Timestep) -> PathBuf {
        match t {
            Timestep::Static => PathBuf::from(format!("{aspect}.csv")),
            Timestep::Step(t) => Path::new(aspect.as_str()).join(format!("t{t:03}.csv")),
        }
    }

    /// Ranked aspect layer CSV.
    pub fn layer(&self, aspect: Aspect, t: Timestep) -> PathBuf {
        self.root.join("layers").join(Self::layer_name(aspect, t))
    }

    /// Raw (pre-ranking) aspect layer CSV.
    pub fn raw_layer(&self, aspect: Aspect, t: Timestep) -> PathBuf {
        self.root.join("layers").join("raw").join(Self::layer_name(aspect, t))
    }

    pub fn layer_png(&self, aspect: Aspect) -> PathBuf {
        self.root.join("layers").join(format!("{aspect}.png"))
    }

    /// `frames/vri_tNNN.{ext}`
    pub fn frame(&self, t: usize, ext: &str) -> PathBuf {
        self.root
            .join("frames")
            .join(format!("{}.{ext}", frame_stem(Timestep::Step(t))))
    }

    pub fn legend(&self) -> PathBuf {
        self.root.join("frames").join("legend.json")
    }

    pub fn sweep_manifest(&self) -> PathBuf {
        self.root.join("frames").join("manifest.json")
    }

    pub fn run_manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    /// Path relative to the root, with `/` separators.
    pub fn relative(&self, p: &Path) -> String {
        let rel = p.strip_prefix(&self.root).unwrap_or(p);
        rel.components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/")
    }
}

/// Creates parent directories and writes through a buffered file.
pub(crate) fn write_with<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        let l = OutputLayout::new("/out");
        assert_eq!(
            l.layer(Aspect::Activity, Timestep::Step(7)),
            Path::new("/out/layers/activity/t007.csv")
        );
        assert_eq!(
            l.raw_layer(Aspect::Demographic, Timestep::Static),
            Path::new("/out/layers/raw/demographic.csv")
        );
        assert_eq!(l.frame(40, "png"), Path::new("/out/frames/vri_t040.png"));
        assert_eq!(l.relative(&l.frame(1, "csv")), "frames/vri_t001.csv");
    }
}
