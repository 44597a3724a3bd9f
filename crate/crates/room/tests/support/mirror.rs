//! Image-source enumeration checked against repeated mirroring of the
//! source in the six wall planes.

use std::collections::HashMap;

use ambisep_room::{image_sources, RoomSpec};

/// Breadth-first closure of the source under wall reflections; the depth at
/// which a position first appears is its bounce count.
pub fn mirrored_images(room: &RoomSpec, src: usize, max_order: usize) -> Vec<([f64; 3], usize)> {
    let key = |p: &[f64; 3]| p.map(|v| (v * 1e6).round() as i64);
    let mut seen: HashMap<[i64; 3], usize> = HashMap::new();
    let mut out = vec![(room.sources[src], 0)];
    seen.insert(key(&room.sources[src]), 0);
    let mut frontier = vec![room.sources[src]];
    for depth in 1..=max_order {
        let mut next = Vec::new();
        for p in &frontier {
            for axis in 0..3 {
                for wall in [0.0, room.dims[axis]] {
                    let mut q = *p;
                    q[axis] = 2.0 * wall - q[axis];
                    if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(key(&q)) {
                        e.insert(depth);
                        out.push((q, depth));
                        next.push(q);
                    }
                }
            }
        }
        frontier = next;
    }
    out
}

/// First disagreement between [`image_sources`] and the mirror closure, if any.
pub fn mismatch(room: &RoomSpec, src: usize, order: usize) -> Option<String> {
    let images = image_sources(room, src, order).ok()?;
    let oracle = mirrored_images(room, src, order);
    if images.len() != oracle.len() {
        return Some(format!("order {order}: {} images, mirror closure has {}", images.len(), oracle.len()));
    }
    for (pos, depth) in &oracle {
        match images.iter().find(|im| (0..3).all(|k| (im.position[k] - pos[k]).abs() < 1e-9)) {
            None => return Some(format!("order {order}: missing image at {pos:?}")),
            Some(im) if im.reflection_order != *depth => {
                return Some(format!("order {order}: image at {pos:?} has {} bounces, expected {depth}", im.reflection_order))
            }
            _ => {}
        }
    }
    None
}
