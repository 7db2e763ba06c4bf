//! placeholder for the document formats
