//! Format-level integration tests: property-based PLY round trips, GLB scene
//! graph and transform baking, and the PNG encoder against an independent
//! decoder.

mod common;

use proptest::prelude::*;

use recon_eval::io::{load_mesh, parse_glb, parse_obj, parse_ply, write_ply, IoError, MeshFormat};
use recon_eval::mesh::TriangleMesh;
use recon_eval::render::{encode_png, Image};
use recon_eval::Mesh;

// --- PLY properties --------------------------------------------------------

fn mesh_strategy() -> impl Strategy<Value = Mesh> {
    let vertex = prop::array::uniform3(-1e12f64..1e12f64);
    (3usize..40).prop_flat_map(move |n| {
        let faces = prop::collection::vec(prop::array::uniform3(0u32..n as u32), 0..60);
        let colors = prop::option::of(prop::collection::vec(
            prop::array::uniform3(0u8..=255u8),
            n..=n,
        ));
        (
            prop::collection::vec(vertex.clone(), n..=n),
            faces,
            colors,
        )
            .prop_map(|(vertices, faces, colors)| {
                let mut mesh = Mesh::new(vertices, faces);
                mesh.colors = colors.map(|cs| {
                    cs.into_iter()
                        .map(|c| [c[0] as f64 / 255.0, c[1] as f64 / 255.0, c[2] as f64 / 255.0])
                        .collect()
                });
                mesh
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ply_round_trip_is_bit_exact(mesh in mesh_strategy(), binary in any::<bool>()) {
        let bytes = write_ply(&mesh, binary).unwrap();
        let back: Mesh = parse_ply(&bytes).unwrap();
        let bits = |m: &Mesh| m.vertices.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back), bits(&mesh));
        prop_assert_eq!(&back.faces, &mesh.faces);
        prop_assert_eq!(&back.colors, &mesh.colors);
    }

    #[test]
    fn parsed_meshes_always_satisfy_invariants(bytes in prop::collection::vec(any::<u8>(), 0..600)) {
        // arbitrary bytes: parse may fail, but a returned mesh must be valid
        if let Ok(mesh) = load_mesh::<f64>(&bytes, None) {
            prop_assert!(mesh.validate().is_ok());
        }
    }

    #[test]
    fn ngon_fan_triangulation_count(n in 3usize..12) {
        // one n-gon face in OBJ and in PLY, both fan out to n-2 triangles
        let mut obj = String::new();
        for i in 0..n {
            let angle = i as f64 / n as f64 * std::f64::consts::TAU;
            obj.push_str(&format!("v {} {} 0\n", angle.cos(), angle.sin()));
        }
        obj.push('f');
        for i in 1..=n {
            obj.push_str(&format!(" {i}"));
        }
        obj.push('\n');
        let mesh: Mesh = parse_obj(obj.as_bytes()).unwrap();
        prop_assert_eq!(mesh.face_count(), n - 2);
        for (k, face) in mesh.faces.iter().enumerate() {
            prop_assert_eq!(face[0], 0);
            prop_assert_eq!(face[1], k as u32 + 1);
            prop_assert_eq!(face[2], k as u32 + 2);
        }

        let mut ply = format!(
            "ply\nformat ascii 1.0\nelement vertex {n}\nproperty float x\nproperty float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n"
        );
        for v in &mesh.vertices {
            ply.push_str(&format!("{} {} {}\n", v[0], v[1], v[2]));
        }
        ply.push_str(&format!("{n}"));
        for i in 0..n {
            ply.push_str(&format!(" {i}"));
        }
        ply.push('\n');
        let ply_mesh: Mesh = parse_ply(ply.as_bytes()).unwrap();
        prop_assert_eq!(&ply_mesh.faces, &mesh.faces);
    }
}

// --- GLB scene graph -------------------------------------------------------

fn triangle_bin() -> Vec<u8> {
    let mut bin = Vec::new();
    for p in [[0f32, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]] {
        for c in p {
            bin.extend_from_slice(&c.to_le_bytes());
        }
    }
    for idx in [0u16, 1, 2] {
        bin.extend_from_slice(&idx.to_le_bytes());
    }
    bin
}

fn scene_json(node: &str) -> String {
    format!(
        concat!(
            r#"{{"asset":{{"version":"2.0"}},"scene":0,"scenes":[{{"nodes":[0]}}],"#,
            r#""nodes":[{node}],"#,
            r#""meshes":[{{"primitives":[{{"attributes":{{"POSITION":0}},"indices":1}}]}}],"#,
            r#""accessors":[{{"bufferView":0,"componentType":5126,"count":3,"type":"VEC3"}},"#,
            r#"{{"bufferView":1,"componentType":5123,"count":3,"type":"SCALAR"}}],"#,
            r#""bufferViews":[{{"buffer":0,"byteOffset":0,"byteLength":36}},"#,
            r#"{{"buffer":0,"byteOffset":36,"byteLength":6}}],"#,
            r#""buffers":[{{"byteLength":44}}]}}"#
        ),
        node = node
    )
}

#[test]
fn glb_trs_transform_is_baked() {
    let json = scene_json(r#"{"mesh":0,"translation":[10.0,0.0,0.0],"scale":[2.0,2.0,2.0]}"#);
    let glb = common::build_glb(&json, &triangle_bin());
    let mesh: Mesh = parse_glb(&glb).unwrap();
    assert_eq!(mesh.vertices[0], [10.0, 0.0, 0.0]);
    assert_eq!(mesh.vertices[1], [12.0, 0.0, 0.0]);
    assert_eq!(mesh.vertices[2], [10.0, 2.0, 0.0]);
}

#[test]
fn glb_matrix_transform_is_baked() {
    // column-major: scale 3 with translation (0, 5, 0)
    let json = scene_json(
        r#"{"mesh":0,"matrix":[3,0,0,0, 0,3,0,0, 0,0,3,0, 0,5,0,1]}"#,
    );
    let glb = common::build_glb(&json, &triangle_bin());
    let mesh: Mesh = parse_glb(&glb).unwrap();
    assert_eq!(mesh.vertices[1], [3.0, 5.0, 0.0]);
}

#[test]
fn glb_rotation_quaternion_is_baked() {
    // 90 degrees about +z maps +x to +y
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let json = scene_json(&format!(r#"{{"mesh":0,"rotation":[0.0,0.0,{h},{h}]}}"#));
    let glb = common::build_glb(&json, &triangle_bin());
    let mesh: Mesh = parse_glb(&glb).unwrap();
    let v1 = mesh.vertices[1];
    assert!(v1[0].abs() < 1e-9 && (v1[1] - 1.0).abs() < 1e-9);
}

#[test]
fn glb_nested_nodes_compose_transforms() {
    let json = concat!(
        r#"{"asset":{"version":"2.0"},"scene":0,"scenes":[{"nodes":[0]}],"#,
        r#""nodes":[{"children":[1],"translation":[1.0,0.0,0.0]},{"mesh":0,"scale":[2.0,2.0,2.0]}],"#,
        r#""meshes":[{"primitives":[{"attributes":{"POSITION":0},"indices":1}]}],"#,
        r#""accessors":[{"bufferView":0,"componentType":5126,"count":3,"type":"VEC3"},"#,
        r#"{"bufferView":1,"componentType":5123,"count":3,"type":"SCALAR"}],"#,
        r#""bufferViews":[{"buffer":0,"byteOffset":0,"byteLength":36},"#,
        r#"{"buffer":0,"byteOffset":36,"byteLength":6}],"#,
        r#""buffers":[{"byteLength":44}]}"#
    );
    let glb = common::build_glb(json, &triangle_bin());
    let mesh: Mesh = parse_glb(&glb).unwrap();
    // parent translation applied after child scale
    assert_eq!(mesh.vertices[1], [3.0, 0.0, 0.0]);
}

#[test]
fn glb_without_indices_uses_sequential_order() {
    let json = concat!(
        r#"{"asset":{"version":"2.0"},"scene":0,"scenes":[{"nodes":[0]}],"#,
        r#""nodes":[{"mesh":0}],"#,
        r#""meshes":[{"primitives":[{"attributes":{"POSITION":0}}]}],"#,
        r#""accessors":[{"bufferView":0,"componentType":5126,"count":3,"type":"VEC3"}],"#,
        r#""bufferViews":[{"buffer":0,"byteOffset":0,"byteLength":36}],"#,
        r#""buffers":[{"byteLength":36}]}"#
    );
    let glb = common::build_glb(json, &triangle_bin()[..36].to_vec().as_slice());
    let mesh: Mesh = parse_glb(&glb).unwrap();
    assert_eq!(mesh.faces, vec![[0, 1, 2]]);
}

#[test]
fn glb_non_triangle_mode_rejected() {
    let json = concat!(
        r#"{"asset":{"version":"2.0"},"scene":0,"scenes":[{"nodes":[0]}],"#,
        r#""nodes":[{"mesh":0}],"#,
        r#""meshes":[{"primitives":[{"attributes":{"POSITION":0},"mode":1}]}],"#,
        r#""accessors":[{"bufferView":0,"componentType":5126,"count":3,"type":"VEC3"}],"#,
        r#""bufferViews":[{"buffer":0,"byteOffset":0,"byteLength":36}],"#,
        r#""buffers":[{"byteLength":36}]}"#
    );
    let glb = common::build_glb(json, &triangle_bin()[..36].to_vec().as_slice());
    assert!(matches!(
        parse_glb::<f64>(&glb),
        Err(IoError::NonTriangleMode(1))
    ));
}

#[test]
fn glb_missing_positions_rejected() {
    let json = concat!(
        r#"{"asset":{"version":"2.0"},"scene":0,"scenes":[{"nodes":[0]}],"#,
        r#""nodes":[{"mesh":0}],"#,
        r#""meshes":[{"primitives":[{"attributes":{}}]}],"#,
        r#""accessors":[],"bufferViews":[],"buffers":[]}"#
    );
    let glb = common::build_glb(json, &[]);
    assert!(matches!(
        parse_glb::<f64>(&glb),
        Err(IoError::MissingPositions)
    ));
}

#[test]
fn glb_multiple_primitives_concatenate() {
    let mut bin = triangle_bin(); // 36 bytes positions + 6 bytes indices
    bin.extend_from_slice(&[0, 0]); // align second position block
    let offset2 = bin.len();
    for p in [[0f32, 0.0, 5.0], [1.0, 0.0, 5.0], [0.0, 1.0, 5.0]] {
        for c in p {
            bin.extend_from_slice(&c.to_le_bytes());
        }
    }
    let json = format!(
        concat!(
            r#"{{"asset":{{"version":"2.0"}},"scene":0,"scenes":[{{"nodes":[0]}}],"#,
            r#""nodes":[{{"mesh":0}}],"#,
            r#""meshes":[{{"primitives":[{{"attributes":{{"POSITION":0}},"indices":1}},"#,
            r#"{{"attributes":{{"POSITION":2}}}}]}}],"#,
            r#""accessors":[{{"bufferView":0,"componentType":5126,"count":3,"type":"VEC3"}},"#,
            r#"{{"bufferView":1,"componentType":5123,"count":3,"type":"SCALAR"}},"#,
            r#"{{"bufferView":2,"componentType":5126,"count":3,"type":"VEC3"}}],"#,
            r#""bufferViews":[{{"buffer":0,"byteOffset":0,"byteLength":36}},"#,
            r#"{{"buffer":0,"byteOffset":36,"byteLength":6}},"#,
            r#"{{"buffer":0,"byteOffset":{offset2},"byteLength":36}}],"#,
            r#""buffers":[{{"byteLength":{total}}}]}}"#
        ),
        offset2 = offset2,
        total = bin.len()
    );
    let glb = common::build_glb(&json, &bin);
    let mesh: Mesh = parse_glb(&glb).unwrap();
    assert_eq!(mesh.vertex_count(), 6);
    assert_eq!(mesh.faces, vec![[0, 1, 2], [3, 4, 5]]);
    assert_eq!(mesh.vertices[3], [0.0, 0.0, 5.0]);
}

#[test]
fn load_mesh_dispatches_on_magic_bytes() {
    let glb = common::reference_triangle_glb();
    assert!(load_mesh::<f64>(&glb, None).is_ok());

    let tri = TriangleMesh::<f64>::new(
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        vec![[0, 1, 2]],
    );
    for binary in [false, true] {
        let ply = write_ply(&tri, binary).unwrap();
        assert!(load_mesh::<f64>(&ply, None).is_ok());
    }
    assert!(load_mesh::<f64>(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n", None).is_ok());

    // a wrong hint must not bypass the format's own validation
    assert!(load_mesh::<f64>(&glb, Some(MeshFormat::Obj)).is_err());
}

// --- PNG against an independent decoder ------------------------------------

#[test]
fn png_round_trip_through_independent_decoder() {
    let (w, h) = (16u32, 16u32);
    let mut img = Image::<f64>::filled(w, h, [0.0; 3]);
    for y in 0..h {
        for x in 0..w {
            img.set_pixel(
                x,
                y,
                [
                    x as f64 / 15.0,
                    y as f64 / 15.0,
                    (x + y) as f64 / 30.0,
                ],
            );
        }
    }
    let bytes = encode_png(&img);

    let decoder = png::Decoder::new(std::io::Cursor::new(&bytes));
    let mut reader = decoder.read_info().expect("decodable header");
    let mut buf = vec![0u8; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).expect("decodable frame");
    assert_eq!((info.width, info.height), (w, h));
    assert_eq!(info.color_type, png::ColorType::Rgb);
    assert_eq!(info.bit_depth, png::BitDepth::Eight);

    let mut expected = Vec::with_capacity((w * h * 3) as usize);
    for y in 0..h {
        for x in 0..w {
            for c in img.pixel(x, y) {
                expected.push((c * 255.0).round() as u8);
            }
        }
    }
    assert_eq!(&buf[..expected.len()], expected.as_slice());
}

#[test]
fn png_worst_case_quantization_boundaries() {
    let img = Image::<f64>::filled(3, 1, [0.0019607843, 0.998, 0.5]);
    let bytes = encode_png(&img);
    let decoder = png::Decoder::new(std::io::Cursor::new(&bytes));
    let mut reader = decoder.read_info().unwrap();
    let mut buf = vec![0u8; reader.output_buffer_size()];
    reader.next_frame(&mut buf).unwrap();
    // round(0.0019607843*255)=round(0.4999...)=0 or 1? 0.50000...? see below
    let expect = [
        (0.0019607843f64 * 255.0).round() as u8,
        (0.998f64 * 255.0).round() as u8,
        (0.5f64 * 255.0).round() as u8,
    ];
    assert_eq!(&buf[..3], &expect);
}
