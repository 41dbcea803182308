//! Labeled triangle geometry: the unit everything renderable is made of.

use serde::{Deserialize, Serialize};

use crate::math::Vec3;

/// Ground-truth semantic classes. The numeric values are the label encoding
/// written into segmentation PNGs and must never be renumbered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
#[serde(rename_all = "snake_case")]
pub enum SemanticClass {
    Background = 0,
    Trunk = 1,
    Branch = 2,
    Leaf = 3,
    Fruit = 4,
}

impl SemanticClass {
    pub const ALL: [SemanticClass; 5] = [
        SemanticClass::Background,
        SemanticClass::Trunk,
        SemanticClass::Branch,
        SemanticClass::Leaf,
        SemanticClass::Fruit,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<SemanticClass> {
        Self::ALL.get(id as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            SemanticClass::Background => "background",
            SemanticClass::Trunk => "trunk",
            SemanticClass::Branch => "branch",
            SemanticClass::Leaf => "leaf",
            SemanticClass::Fruit => "fruit",
        }
    }

    /// Display color used by the manifest palette (not by the label files,
    /// which store raw class ids).
    pub fn display_rgb(self) -> [u8; 3] {
        match self {
            SemanticClass::Background => [0, 0, 0],
            SemanticClass::Trunk => [121, 74, 32],
            SemanticClass::Branch => [188, 126, 64],
            SemanticClass::Leaf => [60, 167, 52],
            SemanticClass::Fruit => [220, 49, 42],
        }
    }
}

/// One triangle tagged with the class of the object it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledTriangle {
    pub vertices: [Vec3; 3],
    pub class: SemanticClass,
}

impl LabeledTriangle {
    pub fn new(a: Vec3, b: Vec3, c: Vec3, class: SemanticClass) -> Self {
        LabeledTriangle {
            vertices: [a, b, c],
            class,
        }
    }

    /// Unnormalized geometric normal (CCW winding).
    pub fn raw_normal(&self) -> Vec3 {
        let [a, b, c] = self.vertices;
        (b - a).cross(c - a)
    }

    pub fn area(&self) -> f64 {
        0.5 * self.raw_normal().length()
    }
}

/// Triangle soup with per-triangle labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledMesh {
    pub triangles: Vec<LabeledTriangle>,
}

impl LabeledMesh {
    pub fn new() -> Self {
        LabeledMesh {
            triangles: Vec::new(),
        }
    }

    pub fn push(&mut self, tri: LabeledTriangle) {
        self.triangles.push(tri);
    }

    pub fn extend(&mut self, other: LabeledMesh) {
        self.triangles.extend(other.triangles);
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Triangle count per class id, for label-preservation checks.
    pub fn class_histogram(&self) -> [usize; 5] {
        let mut h = [0usize; 5];
        for t in &self.triangles {
            h[t.class.id() as usize] += 1;
        }
        h
    }
}
