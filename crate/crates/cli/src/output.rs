use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

/// Stdout or a file that is only created once something is written.
pub enum Sink {
    Stdout(BufWriter<io::Stdout>),
    File {
        path: PathBuf,
        file: Option<BufWriter<File>>,
    },
}

impl Sink {
    pub fn open(path: Option<&Path>) -> io::Result<Sink> {
        Ok(match path {
            None => Sink::Stdout(BufWriter::new(io::stdout())),
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    if !dir.is_dir() {
                        return Err(io::Error::new(
                            io::ErrorKind::NotFound,
                            format!("output directory {} does not exist", dir.display()),
                        ));
                    }
                }
                Sink::File {
                    path: p.to_path_buf(),
                    file: None,
                }
            }
        })
    }

    pub fn finish(&mut self) -> io::Result<()> {
        match self {
            Sink::Stdout(w) => w.flush(),
            Sink::File { file: Some(w), .. } => w.flush(),
            Sink::File { file: None, path } => {
                File::create(&*path)?;
                Ok(())
            }
        }
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            Sink::Stdout(w) => w.write(buf),
            Sink::File { path, file } => {
                if file.is_none() {
                    *file = Some(BufWriter::new(File::create(&*path)?));
                }
                file.as_mut().expect("just created").write(buf)
            }
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Sink::Stdout(w) => w.flush(),
            Sink::File { file: Some(w), .. } => w.flush(),
            Sink::File { file: None, .. } => Ok(()),
        }
    }
}
