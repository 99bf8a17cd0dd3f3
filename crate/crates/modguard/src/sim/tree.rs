use std::collections::BTreeMap;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("path conflict at {0:?}: entry is both a file and a directory")]
pub struct PathConflict(pub String);

/// One node of the virtual file tree: a directory with named children or a
/// file carrying an optional content digest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeNode {
    Dir(BTreeMap<String, TreeNode>),
    File { digest: Option<String> },
}

impl TreeNode {
    pub fn is_file(&self) -> bool {
        matches!(self, TreeNode::File { .. })
    }

    pub fn children(&self) -> Option<&BTreeMap<String, TreeNode>> {
        match self {
            TreeNode::Dir(children) => Some(children),
            TreeNode::File { .. } => None,
        }
    }
}

/// In-memory tree mirroring an archive's file structure. The root is always
/// a directory; paths use `/` and never contain `..`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualFileTree {
    root: TreeNode,
}

impl Default for VirtualFileTree {
    fn default() -> Self {
        VirtualFileTree {
            root: TreeNode::Dir(BTreeMap::new()),
        }
    }
}

fn segments(path: &str) -> Vec<&str> {
    path.split('/').filter(|s| !s.is_empty()).collect()
}

pub(crate) fn join_path(base: &str, rest: &str) -> String {
    if base.is_empty() {
        rest.to_string()
    } else if rest.is_empty() {
        base.to_string()
    } else {
        format!("{base}/{rest}")
    }
}

impl VirtualFileTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    /// Insert a file, creating intermediate directories.
    pub fn insert_file(&mut self, path: &str, digest: Option<String>) -> Result<(), PathConflict> {
        let segs = segments(path);
        if segs.is_empty() {
            return Err(PathConflict(path.to_string()));
        }
        let mut node = &mut self.root;
        for (i, seg) in segs.iter().enumerate() {
            let children = match node {
                TreeNode::Dir(children) => children,
                TreeNode::File { .. } => {
                    return Err(PathConflict(segs[..i].join("/")));
                }
            };
            if i == segs.len() - 1 {
                match children.get(*seg) {
                    Some(TreeNode::Dir(_)) => return Err(PathConflict(path.to_string())),
                    _ => {
                        children.insert(seg.to_string(), TreeNode::File { digest });
                        return Ok(());
                    }
                }
            }
            node = children
                .entry(seg.to_string())
                .or_insert_with(|| TreeNode::Dir(BTreeMap::new()));
        }
        unreachable!()
    }

    /// Ensure a directory exists, creating intermediate directories.
    pub fn insert_dir(&mut self, path: &str) -> Result<(), PathConflict> {
        let segs = segments(path);
        let mut node = &mut self.root;
        for (i, seg) in segs.iter().enumerate() {
            let children = match node {
                TreeNode::Dir(children) => children,
                TreeNode::File { .. } => return Err(PathConflict(segs[..i].join("/"))),
            };
            node = children
                .entry(seg.to_string())
                .or_insert_with(|| TreeNode::Dir(BTreeMap::new()));
        }
        if node.is_file() {
            return Err(PathConflict(path.to_string()));
        }
        Ok(())
    }

    /// Look up a node; the empty path is the root.
    pub fn node(&self, path: &str) -> Option<&TreeNode> {
        let mut node = &self.root;
        for seg in segments(path) {
            node = node.children()?.get(seg)?;
        }
        Some(node)
    }

    pub fn is_file(&self, path: &str) -> bool {
        self.node(path).is_some_and(TreeNode::is_file)
    }

    pub fn is_dir(&self, path: &str) -> bool {
        self.node(path).is_some_and(|n| !n.is_file())
    }

    /// A new tree rooted at the given directory.
    pub fn subtree(&self, path: &str) -> Option<VirtualFileTree> {
        match self.node(path)? {
            TreeNode::Dir(_) => Some(VirtualFileTree {
                root: self.node(path).unwrap().clone(),
            }),
            TreeNode::File { .. } => None,
        }
    }

    /// Detach and return the node at `path`.
    pub fn remove(&mut self, path: &str) -> Option<TreeNode> {
        let segs = segments(path);
        let (last, parents) = segs.split_last()?;
        let mut node = &mut self.root;
        for seg in parents {
            node = match node {
                TreeNode::Dir(children) => children.get_mut(*seg)?,
                TreeNode::File { .. } => return None,
            };
        }
        match node {
            TreeNode::Dir(children) => children.remove(*last),
            TreeNode::File { .. } => None,
        }
    }

    /// Attach a node at `path`, creating intermediate directories. Fails if
    /// something already exists there.
    pub fn attach(&mut self, path: &str, new_node: TreeNode) -> Result<(), PathConflict> {
        let segs = segments(path);
        let Some((last, parents)) = segs.split_last() else {
            return Err(PathConflict(path.to_string()));
        };
        let mut node = &mut self.root;
        for (i, seg) in parents.iter().enumerate() {
            let children = match node {
                TreeNode::Dir(children) => children,
                TreeNode::File { .. } => return Err(PathConflict(segs[..i].join("/"))),
            };
            node = children
                .entry(seg.to_string())
                .or_insert_with(|| TreeNode::Dir(BTreeMap::new()));
        }
        match node {
            TreeNode::Dir(children) => {
                if children.contains_key(*last) {
                    return Err(PathConflict(path.to_string()));
                }
                children.insert(last.to_string(), new_node);
                Ok(())
            }
            TreeNode::File { .. } => Err(PathConflict(path.to_string())),
        }
    }

    pub fn file_count(&self) -> usize {
        self.files().len()
    }

    /// All file paths with their digests, sorted.
    pub fn files(&self) -> Vec<(String, Option<String>)> {
        let mut out = Vec::new();
        collect_files(&self.root, String::new(), &mut out);
        out
    }

    /// Breadth-first search for the first directory named `name` strictly
    /// below `start`. Within one level, candidates are visited in
    /// lexicographic order. Returns the full path of the match.
    pub fn find_dir_bfs(&self, start: &str, name: &str) -> Option<String> {
        let start_node = self.node(start)?;
        let mut queue: VecDeque<(String, &TreeNode)> = VecDeque::new();
        queue.push_back((start.to_string(), start_node));
        while let Some((path, node)) = queue.pop_front() {
            if let TreeNode::Dir(children) = node {
                for (child_name, child) in children {
                    if let TreeNode::Dir(_) = child {
                        let child_path = join_path(&path, child_name);
                        if child_name == name {
                            return Some(child_path);
                        }
                        queue.push_back((child_path, child));
                    }
                }
            }
        }
        None
    }
}

fn collect_files(node: &TreeNode, prefix: String, out: &mut Vec<(String, Option<String>)>) {
    match node {
        TreeNode::File { digest } => out.push((prefix, digest.clone())),
        TreeNode::Dir(children) => {
            for (name, child) in children {
                collect_files(child, join_path(&prefix, name), out);
            }
        }
    }
}
