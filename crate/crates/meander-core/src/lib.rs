pub mod asymptotics;
pub mod correlators;
pub mod exactval;
pub mod meanderconst;
pub mod oracle;
pub mod stablegraphs;
pub mod volpoly;
