//! Edge deployment: a self-contained binary detector image and a
//! fixed-memory inference routine over it.

mod format;
mod runtime;

pub use format::{
    edge_model, image_len, load, serialize, EdgeLayer, EdgeModel, ImageError, FORMAT_VERSION, MAGIC, MAX_WIDTH,
};
pub use runtime::{edge_infer, InferenceScratch};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::build_model;
    use crate::detector::{AnomalyDetector, ThresholdFit};
    use crate::features::FeatureScaler;

    fn detector() -> AnomalyDetector {
        let mut min = [0.0; 16];
        let mut max = [1.0; 16];
        for j in 0..16 {
            min[j] = -(j as f64);
            max[j] = j as f64 * 2.0 + 1.0;
        }
        let fit = ThresholdFit { mean: 0.1, std: 0.05, threshold: 0.15 };
        AnomalyDetector::new(build_model(4), FeatureScaler { min, max }, fit).unwrap()
    }

    #[test]
    fn standard_image_size_and_count() {
        let bytes = serialize(&detector()).unwrap();
        // 8 preamble + 7 * 6 layer headers + 128 scaler + 9696 * 4 payload + 4 threshold + 4 crc
        assert_eq!(bytes.len(), 38970);
        let m = load(&bytes).unwrap();
        assert_eq!(m.parameter_count(), 9696);
        assert_eq!(m.to_bytes(), bytes);
        assert!(core::mem::size_of::<InferenceScratch>() <= 1024);
    }

    #[test]
    fn error_kinds_are_distinct() {
        let bytes = serialize(&detector()).unwrap();
        let mut b = bytes.clone();
        b[0] = b'X';
        assert_eq!(load(&b), Err(ImageError::BadMagic));
        let mut b = bytes.clone();
        b[4] = 2;
        assert_eq!(load(&b), Err(ImageError::BadVersion(2)));
        let mut b = bytes.clone();
        b[500] ^= 0x10;
        assert!(matches!(load(&b), Err(ImageError::BadCrc { .. })));
        assert!(matches!(load(&bytes[..3]), Err(ImageError::InconsistentDimensions(_))));
        assert!(load(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn recrc_of_bad_geometry_is_inconsistent() {
        let mut bytes = serialize(&detector()).unwrap();
        // Widen the first layer's output without touching the payload.
        bytes[10] = 17;
        let n = bytes.len();
        let crc = crc32fast::hash(&bytes[..n - 4]);
        bytes[n - 4..].copy_from_slice(&crc.to_le_bytes());
        assert!(matches!(load(&bytes), Err(ImageError::InconsistentDimensions(_))));
    }

    #[test]
    fn inference_tracks_training_side() {
        let det = detector();
        let m = edge_model(&det).unwrap();
        let mut scratch = InferenceScratch::new();
        let raw = [0.5f64; 16];
        let expected = det.classify_raw(&raw).unwrap();
        let (err, _) = edge_infer(&m, &raw.map(|v| v as f32), &mut scratch);
        assert!((err as f64 - expected.error).abs() < 1e-5);
    }
}
