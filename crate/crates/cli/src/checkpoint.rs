//! Checkpoint files: the agent's own binary snapshot written to disk.

use std::path::Path;

use herd_core::agent::DdpgAgent;

use crate::error::CliError;

pub fn save(path: &Path, agent: &DdpgAgent) -> Result<(), CliError> {
    std::fs::write(path, agent.to_bytes()).map_err(|e| CliError::io(e, path))
}

pub fn load(path: &Path) -> Result<DdpgAgent, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(e, path))?;
    DdpgAgent::from_bytes(&bytes)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use herd_core::agent::AgentConfig;
    use herd_core::types::EnvDims;

    #[test]
    fn checkpoint_survives_the_disk() {
        let dims = EnvDims { state: 4, action: 2, goal: 2 };
        let mut rng = herd_core::seeding::rng(3, herd_core::seeding::Stream::Init, 0, 0);
        let agent = DdpgAgent::new(dims, AgentConfig::default(), &mut rng).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.agent");
        save(&path, &agent).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(back.to_bytes(), agent.to_bytes());
    }

    #[test]
    fn garbage_files_are_rejected_with_the_path_in_the_message() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.agent");
        std::fs::write(&path, b"not an agent").unwrap();
        let err = load(&path).unwrap_err();
        assert!(err.to_string().contains("junk.agent"));
    }
}
