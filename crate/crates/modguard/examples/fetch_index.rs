//! Populate a knowledge base from a simple-repository index: this example
//! hosts one in-process on a loopback socket, then fetches from it.
//!
//! Run with: cargo run --example fetch_index

use modguard::archive::DistributionKind;
use modguard::fixtures::FixtureSpec;
use modguard::kb::{fetch_remote, IndexStore};
use modguard::pep::normalize_name;
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;

fn main() {
    // Three releases of one project, served from memory.
    let mut specs = Vec::new();
    for version in ["1.0", "1.1", "1.2"] {
        let mut spec = FixtureSpec::new("demo", version, DistributionKind::Wheel);
        spec.files.insert(
            "demo/__init__.py".to_string(),
            format!("version = \"{version}\"\n"),
        );
        specs.push(spec);
    }

    let mut routes: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    let mut anchors = String::new();
    for spec in &specs {
        let filename = spec.filename();
        anchors.push_str(&format!(
            "<a href=\"../../packages/{filename}\">{filename}</a><br/>\n"
        ));
        routes.insert(format!("/packages/{filename}"), spec.build().unwrap());
    }
    routes.insert(
        "/simple/demo/".to_string(),
        format!("<!DOCTYPE html><html><body>\n{anchors}</body></html>").into_bytes(),
    );

    let listener = TcpListener::bind("127.0.0.1:0").expect("bind loopback");
    let url = format!("http://127.0.0.1:{}/simple", listener.local_addr().unwrap().port());
    println!("serving a simple index at {url}/demo/");

    // Four requests: page + three files; then again: page only.
    let server = std::thread::spawn(move || {
        for _ in 0..5 {
            let Ok((mut stream, _)) = listener.accept() else {
                return;
            };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            let _ = reader.read_line(&mut request_line);
            loop {
                let mut line = String::new();
                match reader.read_line(&mut line) {
                    Ok(_) if line == "\r\n" || line == "\n" || line.is_empty() => break,
                    Ok(_) => continue,
                    Err(_) => break,
                }
            }
            let path = request_line.split_whitespace().nth(1).unwrap_or("/");
            let response = match routes.get(path) {
                Some(body) => {
                    let mut r = format!(
                        "HTTP/1.0 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                        body.len()
                    )
                    .into_bytes();
                    r.extend_from_slice(body);
                    r
                }
                None => b"HTTP/1.0 404 Not Found\r\nContent-Length: 0\r\n\r\n".to_vec(),
            };
            let _ = stream.write_all(&response);
        }
    });

    let mut store = IndexStore::in_memory();
    let name = normalize_name("demo").unwrap();

    let added = fetch_remote(&url, &name, &mut store).expect("fetch succeeds");
    println!("first fetch: {added} new records");

    let added = fetch_remote(&url, &name, &mut store).expect("fetch succeeds");
    println!("second fetch: {added} new records (idempotent)");

    let versions: Vec<String> = store
        .query_versions(&name)
        .iter()
        .map(|v| v.to_string())
        .collect();
    println!("indexed versions, newest first: {}", versions.join(", "));

    drop(store);
    let _ = server.join();
}
