// Checks a username and password against the password database.
let c = require('containerless');

function main(req) {
  let u = req.body.username;
  let p = req.body.password;
  c.get('passwords.json', function(db) {
    if (db[u] === p) {
      c.respond('ok');
    } else {
      c.respond('error');
    }
  });
}
