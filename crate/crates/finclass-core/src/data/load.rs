use super::{ingest_rgb_image, Dataset, Sample};
use crate::error::{Error, Result};
use crate::imgproc::{read_image, Image, PreprocessConfig};
use rayon::prelude::*;
use std::fs;
use std::path::{Path, PathBuf};

/// Ingestion summary: decode failures are skipped, not fatal.
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadStats {
    pub skipped: usize,
}

/// Load a `root/<class_name>/*.{png,ppm,pgm}` tree: classes are the sorted
/// subdirectory names, files are visited in sorted order. Each image is
/// decoded, resized to 100x100, segmented and stacked into a four-channel
/// sample. Unreadable files are skipped and counted.
///
/// `threads > 1` decodes and preprocesses files in parallel; the resulting
/// sample order always equals the sorted-path order.
pub fn load_directory(
    root: &Path,
    cfg: &PreprocessConfig,
    threads: usize,
) -> Result<(Dataset, LoadStats)> {
    if !root.is_dir() {
        return Err(Error::InvalidInput(format!(
            "dataset root {} is not a directory",
            root.display()
        )));
    }
    let mut class_dirs: Vec<(String, PathBuf)> = Vec::new();
    for entry in fs::read_dir(root)? {
        let entry = entry?;
        if entry.path().is_dir() {
            class_dirs.push((entry.file_name().to_string_lossy().into_owned(), entry.path()));
        }
    }
    if class_dirs.is_empty() {
        return Err(Error::InvalidInput(format!(
            "dataset root {} contains no class directories",
            root.display()
        )));
    }
    class_dirs.sort();

    let mut work: Vec<(PathBuf, usize)> = Vec::new();
    for (label, (_, dir)) in class_dirs.iter().enumerate() {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.is_file()
                    && p.extension()
                        .and_then(|e| e.to_str())
                        .is_some_and(|e| {
                            matches!(e.to_ascii_lowercase().as_str(), "png" | "ppm" | "pgm")
                        })
            })
            .collect();
        files.sort();
        work.extend(files.into_iter().map(|p| (p, label)));
    }

    let ingest = |(path, label): &(PathBuf, usize)| -> Option<Sample> {
        let img = match read_image(path) {
            Ok(img) => img,
            Err(e) => {
                log::warn!("skipping unreadable file {}: {e}", path.display());
                return None;
            }
        };
        let rgb = to_rgb(&img);
        match ingest_rgb_image(&rgb, cfg) {
            Ok(tensor) => Some(Sample {
                tensor,
                label: *label,
                source: path.display().to_string(),
            }),
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                None
            }
        }
    };

    let results: Vec<Option<Sample>> = if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| work.par_iter().map(ingest).collect())
    } else {
        work.iter().map(ingest).collect()
    };

    let mut samples = Vec::with_capacity(results.len());
    let mut skipped = 0usize;
    for r in results {
        match r {
            Some(s) => samples.push(s),
            None => skipped += 1,
        }
    }

    Ok((
        Dataset {
            samples,
            class_names: class_dirs.into_iter().map(|(name, _)| name).collect(),
        },
        LoadStats { skipped },
    ))
}

/// Expand grayscale to RGB; pass RGB through.
fn to_rgb(img: &Image) -> Image {
    if img.channels() == 3 {
        return img.clone();
    }
    let mut data = Vec::with_capacity(img.data().len() * 3);
    for &v in img.data() {
        data.extend_from_slice(&[v, v, v]);
    }
    Image::new(img.width(), img.height(), 3, data).expect("consistent expansion")
}

/// Write the audit manifest: one `path,label,class_name` line per sample.
pub fn write_manifest(ds: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    for s in &ds.samples {
        out.push_str(&format!("{},{},{}\n", s.source, s.label, ds.class_names[s.label]));
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgproc::write_png;

    fn build_tree(root: &Path, classes: &[(&str, usize)]) {
        for (name, count) in classes {
            let dir = root.join(name);
            fs::create_dir_all(&dir).unwrap();
            for i in 0..*count {
                let mut img = Image::filled(40, 40, 3, 20);
                // A bright square so segmentation has something to find.
                for y in 10..30 {
                    for x in 10..30 {
                        img.pixel_mut(x, y).copy_from_slice(&[220, 180, 90]);
                    }
                }
                write_png(&dir.join(format!("img_{i:03}.png")), &img).unwrap();
            }
        }
    }

    #[test]
    fn loads_sorted_classes_and_labels() {
        let dir = tempfile::tempdir().unwrap();
        build_tree(dir.path(), &[("zebra", 2), ("angel", 2)]);
        let (ds, stats) = load_directory(dir.path(), &PreprocessConfig::default(), 1).unwrap();
        assert_eq!(ds.class_names, vec!["angel", "zebra"]);
        assert_eq!(ds.samples.len(), 4);
        assert_eq!(stats.skipped, 0);
        assert!(ds.samples.iter().all(|s| s.label < 2));
        assert_eq!(ds.samples[0].label, 0); // angel sorts first
        for s in &ds.samples {
            assert_eq!(s.tensor.shape(), &[100, 100, 4]);
        }
    }

    #[test]
    fn corrupt_file_is_skipped_with_count() {
        let dir = tempfile::tempdir().unwrap();
        build_tree(dir.path(), &[("fish", 4)]);
        fs::write(dir.path().join("fish/broken.png"), b"junk").unwrap();
        let (ds, stats) = load_directory(dir.path(), &PreprocessConfig::default(), 1).unwrap();
        assert_eq!(ds.samples.len(), 4);
        assert_eq!(stats.skipped, 1);
    }

    #[test]
    fn missing_root_and_empty_root_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_directory(&dir.path().join("nope"), &PreprocessConfig::default(), 1).is_err());
        assert!(load_directory(dir.path(), &PreprocessConfig::default(), 1).is_err());
    }

    #[test]
    fn parallel_order_matches_sequential() {
        let dir = tempfile::tempdir().unwrap();
        build_tree(dir.path(), &[("a", 3), ("b", 2)]);
        let cfg = PreprocessConfig::default();
        let (seq, _) = load_directory(dir.path(), &cfg, 1).unwrap();
        let (par, _) = load_directory(dir.path(), &cfg, 4).unwrap();
        assert_eq!(seq.samples.len(), par.samples.len());
        for (a, b) in seq.samples.iter().zip(&par.samples) {
            assert_eq!(a.source, b.source);
            assert_eq!(a.tensor.data(), b.tensor.data());
        }
    }

    #[test]
    fn manifest_lines() {
        let dir = tempfile::tempdir().unwrap();
        build_tree(dir.path(), &[("a", 1), ("b", 1)]);
        let (ds, _) = load_directory(dir.path(), &PreprocessConfig::default(), 1).unwrap();
        let mpath = dir.path().join("manifest.txt");
        write_manifest(&ds, &mpath).unwrap();
        let text = fs::read_to_string(&mpath).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].ends_with(",0,a"));
        assert!(lines[1].ends_with(",1,b"));
    }
}
