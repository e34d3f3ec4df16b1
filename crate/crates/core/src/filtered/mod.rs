//! Subcarrier-filtered (FBMC-OQAM, GFDM) and subband-filtered (UFMC,
//! f-OFDM) multicarrier waveforms.

pub mod fbmc;
pub mod fofdm;
pub mod gfdm;
pub mod prototype;
pub mod ufmc;

pub use fbmc::{demod_fbmc_oqam, fbmc_analysis, fbmc_burst_len, mod_fbmc_oqam};
pub use fofdm::{demod_f_ofdm, mod_f_ofdm, FofdmBand, FofdmLayout};
pub use gfdm::{demod_gfdm_zf, mod_gfdm, mod_gfdm_transform, GfdmConfig, GfdmReceiver};
pub use prototype::{design_phydyas, FilterFamily, GfdmPrototype, PrototypeFilter};
pub use ufmc::{demod_ufmc, mod_ufmc, Subband, SubbandLayout};
