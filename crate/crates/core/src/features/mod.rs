//! Moneyness classes, sentiment indicators, contract datasets and the
//! day-level split.

mod dataset;
mod ewm;
mod moneyness;
mod sentiment;

pub use dataset::{
    read_options, read_rv_forecast, split_dataset, write_options, write_rv_forecast,
    OptionContract, RvForecast, Split, MIN_LABEL,
};
pub use ewm::{ewm, ewm_std, ewm_alpha, EwmState};
pub use moneyness::{classify_moneyness, MoneynessClass, ATM_BAND};
pub use sentiment::{
    feature_names, read_guba, sentiment_features, write_feature_manifest, write_guba, GubaDaily,
    SentimentHistory, BURN_IN_DAYS, EPS,
};
