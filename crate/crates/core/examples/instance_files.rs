//! Writing a generated instance to disk and reading it back.

use rsvrg::problems::io::{load, save, StoredInstance};
use rsvrg::problems::{gen_centroid_instance, gen_pca_instance};

fn main() -> rsvrg::Result<()> {
    let dir = std::env::temp_dir().join("rsvrg-instances");
    std::fs::create_dir_all(&dir)?;

    let pca = gen_pca_instance(6, 12, 0.25, 3)?;
    let path = dir.join("pca.txt");
    save(&path, &StoredInstance::Pca(pca.clone()))?;
    match load(&path)? {
        StoredInstance::Pca(back) => {
            println!(
                "pca: max data difference {:.1e}",
                (back.data() - pca.data()).amax()
            );
        }
        StoredInstance::Centroid(_) => unreachable!(),
    }

    let cen = gen_centroid_instance(3, 4, 10.0, 3)?;
    let path = dir.join("centroid.txt");
    save(&path, &StoredInstance::Centroid(cen.clone()))?;
    if let StoredInstance::Centroid(back) = load(&path)? {
        let worst = back
            .matrices()
            .iter()
            .zip(cen.matrices())
            .map(|(a, b)| (a.mat() - b.mat()).amax())
            .fold(0.0, f64::max);
        println!(
            "centroid: {} matrices, max difference {worst:.1e}",
            back.matrices().len()
        );
    }
    println!("files in {}", dir.display());
    Ok(())
}
