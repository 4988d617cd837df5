use std::fs;
use std::path::{Path, PathBuf};

use log::warn;

use crate::error::{Error, Result};

use super::SilhouetteMask;

/// One labelled silhouette sequence. Every frame carries the video's label.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoRecord {
    pub id: String,
    /// 1-based action class.
    pub class_label: usize,
    pub frames: Vec<SilhouetteMask>,
}

/// Videos plus the class names that produced labels `1..=K` (sorted order).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub class_names: Vec<String>,
    pub videos: Vec<VideoRecord>,
}

impl Dataset {
    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }
}

fn sorted_subdirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(format!("reading {}", dir.display()), e))?;
    let mut dirs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(format!("reading {}", dir.display()), e))?;
        let path = entry.path();
        if path.is_dir() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}

fn is_frame_file(path: &Path) -> bool {
    let ext_ok = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.eq_ignore_ascii_case("png") || e.eq_ignore_ascii_case("pgm"))
        .unwrap_or(false);
    let stem_ok = path
        .file_stem()
        .and_then(|s| s.to_str())
        .map(|s| s.starts_with("frame_"))
        .unwrap_or(false);
    path.is_file() && ext_ok && stem_ok
}

/// Sort key: the trailing integer of the file stem, so `frame_2` precedes `frame_10`.
fn frame_key(path: &Path) -> (Option<u64>, String) {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    let digits: String = stem
        .chars()
        .rev()
        .take_while(|c| c.is_ascii_digit())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    (digits.parse().ok(), stem.to_string())
}

/// Frame files of a video directory, ordered numerically.
pub fn frame_files(video_dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(video_dir)
        .map_err(|e| Error::io(format!("reading {}", video_dir.display()), e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(format!("reading {}", video_dir.display()), e))?;
        if is_frame_file(&entry.path()) {
            files.push(entry.path());
        }
    }
    files.sort_by_key(|p| frame_key(p));
    Ok(files)
}

pub fn load_mask(path: &Path) -> Result<SilhouetteMask> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    SilhouetteMask::from_gray(&img.to_luma8())
}

/// Loads every usable frame of one video directory. Frames without foreground
/// are skipped with a warning.
pub fn load_video_frames(video_dir: &Path) -> Result<Vec<SilhouetteMask>> {
    if !video_dir.is_dir() {
        return Err(Error::MissingDirectory(video_dir.to_path_buf()));
    }
    let mut frames = Vec::new();
    for file in frame_files(video_dir)? {
        let mask = load_mask(&file)?;
        if mask.foreground_count() == 0 {
            warn!("skipping {}: no foreground pixels", file.display());
            continue;
        }
        frames.push(mask);
    }
    if frames.is_empty() {
        return Err(Error::NoUsableFrames(video_dir.to_path_buf()));
    }
    Ok(frames)
}

/// Loads `root/<class_name>/<video_id>/frame_*.png|pgm`.
///
/// Labels are assigned `1..=K` by sorted class-directory name.
pub fn load_dataset(root: &Path) -> Result<Dataset> {
    if !root.is_dir() {
        return Err(Error::MissingDirectory(root.to_path_buf()));
    }
    let class_dirs = sorted_subdirs(root)?;
    if class_dirs.is_empty() {
        return Err(Error::EmptyDirectory(root.to_path_buf()));
    }

    let mut class_names = Vec::with_capacity(class_dirs.len());
    let mut videos = Vec::new();
    for (ci, class_dir) in class_dirs.iter().enumerate() {
        let video_dirs = sorted_subdirs(class_dir)?;
        if video_dirs.is_empty() {
            return Err(Error::EmptyDirectory(class_dir.clone()));
        }
        class_names.push(dir_name(class_dir));
        for video_dir in video_dirs {
            videos.push(VideoRecord {
                id: dir_name(&video_dir),
                class_label: ci + 1,
                frames: load_video_frames(&video_dir)?,
            });
        }
    }
    Ok(Dataset {
        class_names,
        videos,
    })
}

/// Writes a dataset in the layout `load_dataset` reads, as PNG frames.
pub fn export_dataset(dataset: &Dataset, root: &Path) -> Result<()> {
    for video in &dataset.videos {
        let class_name = dataset
            .class_names
            .get(video.class_label.wrapping_sub(1))
            .ok_or_else(|| Error::input(format!("video {} has label {} outside 1..={}", video.id, video.class_label, dataset.num_classes())))?;
        let dir = root.join(class_name).join(&video.id);
        fs::create_dir_all(&dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        for (i, frame) in video.frames.iter().enumerate() {
            let path = dir.join(format!("frame_{:04}.png", i + 1));
            frame.to_gray().save(&path).map_err(|source| Error::Image {
                path: path.clone(),
                source,
            })?;
        }
    }
    Ok(())
}

fn dir_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_frame_order() {
        let mut names = vec!["frame_10.png", "frame_2.png", "frame_1.pgm"]
            .into_iter()
            .map(PathBuf::from)
            .collect::<Vec<_>>();
        names.sort_by_key(|p| frame_key(p));
        assert_eq!(
            names,
            vec![
                PathBuf::from("frame_1.pgm"),
                PathBuf::from("frame_2.png"),
                PathBuf::from("frame_10.png")
            ]
        );
    }
}
