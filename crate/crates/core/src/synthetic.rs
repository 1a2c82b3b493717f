//! Scripted git repositories with fully known histories, used by tests and
//! the `synth` command.

use std::path::Path;

use git2::{IndexAddOption, Repository, Signature, Time};

use crate::error::HistoryError;
use crate::history::{BugEntry, BugLedger};

pub const SCRIPT_BRANCH: &str = "main";
const BASE_TIME: i64 = 1_600_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FileEdit {
    Write { path: String, content: String },
    Delete { path: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptedCommit {
    pub message: String,
    pub edits: Vec<FileEdit>,
}

impl ScriptedCommit {
    pub fn new(message: &str) -> Self {
        Self { message: message.into(), edits: Vec::new() }
    }

    pub fn write(mut self, path: &str, content: &str) -> Self {
        self.edits.push(FileEdit::Write { path: path.into(), content: content.into() });
        self
    }

    pub fn delete(mut self, path: &str) -> Self {
        self.edits.push(FileEdit::Delete { path: path.into() });
        self
    }
}

/// Creates a repository at `dir` (which must not already hold one) and
/// records the commits on branch `main`. Author, committer and timestamps
/// are fixed so the commit ids depend only on the script.
pub fn write_scripted_repo(dir: &Path, script: &[ScriptedCommit]) -> Result<Vec<String>, HistoryError> {
    let access = |e: git2::Error| HistoryError::RepoAccess { path: dir.display().to_string(), message: e.message().into() };
    std::fs::create_dir_all(dir)?;
    let repo = Repository::init(dir).map_err(access)?;
    repo.set_head(&format!("refs/heads/{SCRIPT_BRANCH}")).map_err(access)?;

    let mut ids = Vec::with_capacity(script.len());
    let mut parent: Option<git2::Oid> = None;
    for (i, step) in script.iter().enumerate() {
        let mut index = repo.index().map_err(access)?;
        for edit in &step.edits {
            match edit {
                FileEdit::Write { path, content } => {
                    let full = dir.join(path);
                    if let Some(p) = full.parent() {
                        std::fs::create_dir_all(p)?;
                    }
                    std::fs::write(&full, content)?;
                    index.add_path(Path::new(path)).map_err(access)?;
                }
                FileEdit::Delete { path } => {
                    std::fs::remove_file(dir.join(path))?;
                    index.remove_path(Path::new(path)).map_err(access)?;
                }
            }
        }
        index.update_all(["*"], None).map_err(access)?;
        index.add_all(["*"], IndexAddOption::DEFAULT, None).map_err(access)?;
        index.write().map_err(access)?;
        let tree_id = index.write_tree().map_err(access)?;
        let tree = repo.find_tree(tree_id).map_err(access)?;
        let sig = Signature::new("Scripted", "scripted@example.com", &Time::new(BASE_TIME + i as i64 * 3600, 0))
            .map_err(access)?;
        let parents: Vec<git2::Commit> =
            parent.map(|p| repo.find_commit(p)).transpose().map_err(access)?.into_iter().collect();
        let parent_refs: Vec<&git2::Commit> = parents.iter().collect();
        let oid = repo
            .commit(Some("HEAD"), &sig, &sig, &step.message, &tree, &parent_refs)
            .map_err(access)?;
        ids.push(oid.to_string());
        parent = Some(oid);
    }
    Ok(ids)
}

const SHAPE: &str = "package demo;

public interface Shape {
    double area();
}
";

const NAMED: &str = "package demo;

public interface Named {
    String name();
}
";

const LABELED: &str = "package demo;

public interface Labeled extends Named {
    String label();
}
";

const CIRCLE_0: &str = "package demo;

public class Circle implements Shape {
    private double r;

    public Circle(double r) {
        this.r = r;
    }

    public double area() {
        return Math.PI * r * r;
    }
}
";

const BASE: &str = "package demo;

public abstract class Base {
    protected int id;

    protected String describe() {
        return \"shape-\" + id;
    }

    protected void touch() {
        id++;
    }
}
";

const CIRCLE_1: &str = "package demo;

public class Circle extends Base implements Shape {
    private double r;

    public Circle(double r) {
        this.r = r;
    }

    public double area() {
        touch();
        return Math.PI * r * r;
    }

    public String toString() {
        return describe();
    }
}
";

const SQUARE_0: &str = "package demo;

public class Square implements Shape {
    private double side;

    public Square(double side) {
        this.side = side;
    }

    public double area() {
        return side * side;
    }
}
";

const SQUARE_1: &str = "package demo;

public class Square extends Base implements Shape, Labeled {
    private double side;

    public Square(double side) {
        this.side = side;
    }

    public double area() {
        touch();
        return side * side;
    }

    public String name() {
        return \"square\";
    }

    public String label() {
        return describe();
    }
}
";

const RENDERER_0: &str = "package demo;

public class Renderer {
    private Shape shape;

    public Renderer(Shape shape) {
        this.shape = shape;
    }

    public String render() {
        return \"area=\" + shape.area();
    }
}
";

const RENDERER_1: &str = "package demo;

public class Renderer {
    private Shape shape;
    private Logger log = new Logger();

    public Renderer(Shape shape) {
        this.shape = shape;
    }

    public String render() {
        log.info(\"render\");
        return \"area=\" + shape.area();
    }
}
";

const RENDERER_2: &str = "package demo;

public class Renderer {
    private Shape shape;
    private Logger log = new Logger();

    public Renderer(Shape shape) {
        this.shape = shape;
    }

    public String render() {
        log.info(\"render\");
        Formatter f = new Formatter();
        return f.format(shape.area());
    }
}
";

const LOGGER: &str = "package demo;

public class Logger {
    private int count;

    public void info(String msg) {
        count++;
    }
}
";

const FORMATTER: &str = "package demo;

public class Formatter {
    public String format(double v) {
        return \"area=\" + v;
    }
}
";

const TRIANGLE: &str = "package demo;

public class Triangle extends Base implements Shape {
    private double b;
    private double h;

    public Triangle(double b, double h) {
        this.b = b;
        this.h = h;
    }

    public double area() {
        touch();
        return b * h / 2;
    }
}
";

const CANVAS_0: &str = "package demo;

import java.util.ArrayList;
import java.util.List;

public class Canvas {
    private List<Shape> shapes = new ArrayList<>();

    public void add(Shape s) {
        shapes.add(s);
    }

    public double total() {
        double t = 0;
        for (Shape s : shapes) {
            t += s.area();
        }
        return t;
    }
}
";

const CANVAS_1: &str = "package demo;

import java.util.ArrayList;
import java.util.List;

public class Canvas {
    private List<Shape> shapes = new ArrayList<>();
    private Renderer renderer;
    private Logger log = new Logger();

    public void add(Shape s) {
        log.info(\"add\");
        shapes.add(s);
    }

    public double total() {
        double t = 0;
        for (Shape s : shapes) {
            t += s.area();
        }
        return t;
    }

    public String show(Shape s) {
        renderer = new Renderer(s);
        return renderer.render();
    }
}
";

/// Twenty commits growing a small shape library, with some documentation
/// only commits and one deletion.
pub fn demo_script() -> Vec<ScriptedCommit> {
    let p = |name: &str| format!("src/demo/{name}.java");
    vec![
        ScriptedCommit::new("initial shapes")
            .write("README.md", "# demo\n")
            .write(&p("Shape"), SHAPE)
            .write(&p("Circle"), CIRCLE_0),
        ScriptedCommit::new("add square").write(&p("Square"), SQUARE_0),
        ScriptedCommit::new("add renderer").write(&p("Renderer"), RENDERER_0),
        ScriptedCommit::new("introduce base class").write(&p("Base"), BASE).write(&p("Circle"), CIRCLE_1),
        ScriptedCommit::new("docs").write("README.md", "# demo\n\nShapes and rendering.\n"),
        ScriptedCommit::new("add logger").write(&p("Logger"), LOGGER).write(&p("Renderer"), RENDERER_1),
        ScriptedCommit::new("named interface").write(&p("Named"), NAMED),
        ScriptedCommit::new("labeled squares").write(&p("Labeled"), LABELED).write(&p("Square"), SQUARE_1),
        ScriptedCommit::new("add canvas").write(&p("Canvas"), CANVAS_0),
        ScriptedCommit::new("docs: usage").write("README.md", "# demo\n\nShapes and rendering.\n\nUse Canvas.\n"),
        ScriptedCommit::new("add triangle").write(&p("Triangle"), TRIANGLE),
        ScriptedCommit::new("canvas renders").write(&p("Canvas"), CANVAS_1),
        ScriptedCommit::new("formatter").write(&p("Formatter"), FORMATTER).write(&p("Renderer"), RENDERER_2),
        ScriptedCommit::new("notes").write("NOTES.txt", "todo: polygons\n"),
        ScriptedCommit::new("drop triangle").delete(&p("Triangle")),
        ScriptedCommit::new("restore triangle").write(&p("Triangle"), TRIANGLE),
        ScriptedCommit::new("square without base").write(&p("Square"), SQUARE_0),
        ScriptedCommit::new("square with base again").write(&p("Square"), SQUARE_1),
        ScriptedCommit::new("simplify renderer").write(&p("Renderer"), RENDERER_0),
        ScriptedCommit::new("docs: final").write("README.md", "# demo\n").delete("NOTES.txt"),
    ]
}

/// Three bugs over the demo history: one introduced at 3 and fixed at 7,
/// one introduced at 5 and fixed at 12, and one with unknown origin fixed
/// at 10.
pub fn demo_ledger(commit_ids: &[String]) -> BugLedger {
    let entry = |id: &str, intro: Option<usize>, fix: usize| BugEntry {
        bug_id: id.into(),
        introducing_commit: intro.map(|i| commit_ids[i].clone()),
        fixing_commit: commit_ids[fix].clone(),
    };
    BugLedger { entries: vec![entry("BUG-1", Some(3), 7), entry("BUG-2", Some(5), 12), entry("BUG-3", None, 10)] }
}
