// Deposits and withdrawals against a transactional datastore. Each request
// carries a transaction id; replaying one returns the original result.
let c = require('containerless');

function main(req) {
  let b = req.body;
  let account = b.account;
  c.get('datastore/transactions/' + b.txid, function(prev) {
    if (prev !== undefined) {
      c.respond({ txid: b.txid, balance: prev.balance });
    } else {
      c.get('datastore/accounts/' + account, function(acct) {
        let balance = 0;
        let version = 0;
        if (acct !== undefined) {
          balance = acct.balance;
          version = acct.version;
        }
        let amount = b.amount;
        if (b.type === 'withdraw') {
          amount = 0 - amount;
        }
        if (balance + amount < 0) {
          c.respond({ error: 'insufficient funds', balance: balance });
        } else {
          let commit = { account: account, txid: b.txid, version: version, balance: balance + amount };
          c.post({ url: 'datastore/commit', body: commit }, function(res) {
            if (res.committed) {
              c.respond({ txid: b.txid, balance: res.balance });
            } else {
              c.respond({ error: 'conflict' });
            }
          });
        }
      });
    }
  });
}
