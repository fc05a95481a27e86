package app.service;

import java.security.PrivateKey;
import java.security.PublicKey;
import javax.crypto.KeyAgreement;

public class Agreement {
    public byte[] shared(PrivateKey mine, PublicKey theirs) throws Exception {
        KeyAgreement agreement = KeyAgreement.getInstance("ECDH");
        agreement.init(mine);
        agreement.doPhase(theirs, true);
        return agreement.generateSecret();
    }
}
