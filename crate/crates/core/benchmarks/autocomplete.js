// Returns up to ten words that start with the given prefix.
let c = require('containerless');
let words = __WORDS__;

function main(req) {
  let prefix = req.body.prefix;
  if (prefix === undefined || prefix.length === 0) {
    c.respond({ error: 'empty prefix' });
  } else {
    let found = [];
    let i = 0;
    while (i < words.length && found.length < 10) {
      let w = words[i];
      let ok = w.length >= prefix.length;
      let j = 0;
      while (ok && j < prefix.length) {
        if (w[j] !== prefix[j]) {
          ok = false;
        }
        j = j + 1;
      }
      if (ok) {
        found[found.length] = w;
      }
      i = i + 1;
    }
    c.respond({ prefix: prefix, completions: found });
  }
}
